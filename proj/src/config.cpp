#include "healthroute/config.h"

#include "healthroute/digest.h"
#include "healthroute/errors.h"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fmt/format.h>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

namespace healthroute {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>> &known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"pyramid", {"brackets"}},
        {"prevalence", {"visual", "respiratory", "mobility", "cardio", "heart_age_threshold"}},
        {"severity", {"weights"}},
        {"modifiers",
         {"age_0", "age_1", "age_2", "age_3", "visual", "respiratory", "mobility", "heart"}},
        {"noise", {"std_dev", "enabled"}},
        {"model", {"metric", "k_neighbors", "min_overlap"}},
        {"filter", {"threshold", "strict"}},
    };
    return keys;
}

template <typename T> T parse_number(const std::string &raw, const std::string &key) {
    const auto text = boost::algorithm::trim_copy(raw);
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ConfigError(fmt::format("config key {}: '{}' is not a valid number", key, raw));
    }
    return value;
}

bool parse_bool(const std::string &raw, const std::string &key) {
    const auto text = boost::algorithm::to_lower_copy(boost::algorithm::trim_copy(raw));
    if (text == "true" || text == "1" || text == "yes" || text == "on") {
        return true;
    }
    if (text == "false" || text == "0" || text == "no" || text == "off") {
        return false;
    }
    throw ConfigError(fmt::format("config key {}: '{}' is not a boolean", key, raw));
}

std::vector<std::string> split_list(const std::string &raw) {
    std::vector<std::string> parts;
    boost::algorithm::split(parts, raw, boost::algorithm::is_any_of(","));
    for (auto &part : parts) {
        boost::algorithm::trim(part);
    }
    return parts;
}

std::vector<double> parse_doubles(const std::string &raw, const std::string &key,
                                  std::size_t expected) {
    std::vector<double> values;
    for (const auto &part : split_list(raw)) {
        values.push_back(parse_number<double>(part, key));
    }
    if (values.size() != expected) {
        throw ConfigError(
            fmt::format("config key {}: expected {} values, got {}", key, expected, values.size()));
    }
    return values;
}

Modifier parse_modifier(const std::string &raw, const std::string &key) {
    const auto v = parse_doubles(raw, key, 3);
    return Modifier{v[0], v[1], v[2]};
}

AgePyramid parse_pyramid(const std::string &raw) {
    std::vector<AgeBracket> brackets;
    for (const auto &part : split_list(raw)) {
        const auto dash = part.find('-');
        const auto colon = part.find(':');
        if (dash == std::string::npos || colon == std::string::npos || colon < dash) {
            throw ConfigError(
                fmt::format("pyramid bracket '{}' must look like min-max:weight", part));
        }
        brackets.push_back(AgeBracket{
            parse_number<int>(part.substr(0, dash), "pyramid.brackets"),
            parse_number<int>(part.substr(dash + 1, colon - dash - 1), "pyramid.brackets"),
            parse_number<double>(part.substr(colon + 1), "pyramid.brackets")});
    }
    return AgePyramid{std::move(brackets)};
}

std::string join_doubles(std::initializer_list<double> values) {
    std::string out;
    for (double v : values) {
        if (!out.empty()) {
            out += ", ";
        }
        out += fmt::format("{}", v);
    }
    return out;
}

std::string format_modifier(const Modifier &m) {
    return join_doubles({m.distance, m.elevation, m.pavement});
}

std::string bracket_list(const AgePyramid &pyramid) {
    std::string out;
    for (const auto &b : pyramid.brackets()) {
        if (!out.empty()) {
            out += ", ";
        }
        out += fmt::format("{}-{}:{}", b.min_age, b.max_age, b.weight);
    }
    return out;
}

std::string severity_list(const PrevalenceConfig &p) {
    std::string out;
    for (double w : p.severity_weights) {
        if (!out.empty()) {
            out += ", ";
        }
        out += fmt::format("{}", w);
    }
    return out;
}

} // namespace

void RunConfig::validate() const {
    prevalence.validate();
    modifiers.validate();
    noise.validate();
    model.validate();
    heart_conditional_probability(pyramid, prevalence);
}

RunConfig parse_config(std::istream &in) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error &e) {
        throw ConfigError(fmt::format("config line {}: {}", e.line(), e.message()));
    }

    RunConfig config;
    for (const auto &[section, keys] : tree) {
        const auto known = known_keys().find(section);
        if (known == known_keys().end()) {
            throw ConfigError(fmt::format("unknown config section [{}]", section));
        }
        if (keys.empty() && !keys.data().empty()) {
            throw ConfigError(fmt::format("config key {} must sit inside a section", section));
        }
        for (const auto &[key, node] : keys) {
            if (!known->second.contains(key)) {
                throw ConfigError(fmt::format("unknown config key {}.{}", section, key));
            }
            const std::string name = section + "." + key;
            const std::string &value = node.data();

            if (section == "pyramid") {
                config.pyramid = parse_pyramid(value);
            } else if (section == "prevalence") {
                auto &p = config.prevalence;
                if (key == "visual") {
                    p.p_visual = parse_number<double>(value, name);
                } else if (key == "respiratory") {
                    p.p_respiratory = parse_number<double>(value, name);
                } else if (key == "mobility") {
                    p.p_mobility = parse_number<double>(value, name);
                } else if (key == "cardio") {
                    p.p_cardio = parse_number<double>(value, name);
                } else {
                    p.heart_age_threshold = parse_number<int>(value, name);
                }
            } else if (section == "severity") {
                const auto weights = parse_doubles(value, name, 10);
                std::copy(weights.begin(), weights.end(),
                          config.prevalence.severity_weights.begin());
            } else if (section == "modifiers") {
                const auto row = parse_modifier(value, name);
                if (key.starts_with("age_")) {
                    config.modifiers.age_brackets[static_cast<std::size_t>(key[4] - '0')] = row;
                } else {
                    const std::size_t index = key == "visual"        ? 0
                                              : key == "respiratory" ? 1
                                              : key == "mobility"    ? 2
                                                                     : 3;
                    config.modifiers.conditions[index] = row;
                }
            } else if (section == "noise") {
                if (key == "std_dev") {
                    config.noise.std_dev = parse_number<double>(value, name);
                } else {
                    config.noise.enabled = parse_bool(value, name);
                }
            } else if (section == "model") {
                if (key == "metric") {
                    config.model.metric = parse_metric(boost::algorithm::trim_copy(value));
                } else if (key == "k_neighbors") {
                    config.model.k_neighbors = parse_number<std::size_t>(value, name);
                } else {
                    config.model.min_overlap = parse_number<std::size_t>(value, name);
                }
            } else if (section == "filter") {
                if (key == "threshold") {
                    config.filter.threshold = parse_number<double>(value, name);
                } else {
                    config.filter.strict = parse_bool(value, name);
                }
            }
        }
    }

    config.validate();
    return config;
}

RunConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(fmt::format("cannot open config file {}", path.string()));
    }
    return parse_config(in);
}

std::string format_config(const RunConfig &c) {
    const auto &p = c.prevalence;
    const auto &m = c.modifiers;
    std::ostringstream out;
    out << "[pyramid]\n"
        << "brackets = " << bracket_list(c.pyramid) << "\n\n"
        << "[prevalence]\n"
        << fmt::format("visual = {}\nrespiratory = {}\nmobility = {}\ncardio = {}\n", p.p_visual,
                       p.p_respiratory, p.p_mobility, p.p_cardio)
        << fmt::format("heart_age_threshold = {}\n\n", p.heart_age_threshold)
        << "[severity]\n"
        << "weights = " << severity_list(p) << "\n\n"
        << "[modifiers]\n";
    for (std::size_t i = 0; i < m.age_brackets.size(); ++i) {
        out << fmt::format("age_{} = {}\n", i, format_modifier(m.age_brackets[i]));
    }
    for (auto condition : kAllConditions) {
        out << fmt::format("{} = {}\n", condition_name(condition),
                           format_modifier(m.conditions[static_cast<std::size_t>(condition)]));
    }
    out << "\n[noise]\n"
        << fmt::format("std_dev = {}\nenabled = {}\n\n", c.noise.std_dev, c.noise.enabled)
        << "[model]\n"
        << fmt::format("metric = {}\nk_neighbors = {}\nmin_overlap = {}\n\n",
                       to_string(c.model.metric), c.model.k_neighbors, c.model.min_overlap)
        << "[filter]\n"
        << fmt::format("threshold = {}\nstrict = {}\n", c.filter.threshold, c.filter.strict);
    return out.str();
}

std::string canonical_text(const AgePyramid &pyramid) {
    return "pyramid:" + bracket_list(pyramid);
}

std::string canonical_text(const PrevalenceConfig &p) {
    return fmt::format("prevalence:visual={};respiratory={};mobility={};cardio={};"
                       "heart_age_threshold={};severity={}",
                       p.p_visual, p.p_respiratory, p.p_mobility, p.p_cardio,
                       p.heart_age_threshold, severity_list(p));
}

std::string canonical_text(const ModifierTable &table) {
    std::string out = "modifiers:";
    for (const auto &row : table.age_brackets) {
        out += "(" + format_modifier(row) + ")";
    }
    for (const auto &row : table.conditions) {
        out += "(" + format_modifier(row) + ")";
    }
    return out;
}

std::string canonical_text(const NoiseConfig &noise) {
    return fmt::format("noise:std_dev={};enabled={}", noise.std_dev, noise.enabled);
}

std::string canonical_text(const SimilarityModel &model, const HealthFilterConfig &filter) {
    return fmt::format("model:metric={};k={};min_overlap={};threshold={};strict={}",
                       to_string(model.metric), model.k_neighbors, model.min_overlap,
                       filter.threshold, filter.strict);
}

std::map<std::string, std::string> config_digests(const RunConfig &config) {
    return {
        {"pyramid", sha256_hex(canonical_text(config.pyramid))},
        {"prevalence", sha256_hex(canonical_text(config.prevalence))},
        {"modifier_table", sha256_hex(canonical_text(config.modifiers))},
        {"noise", sha256_hex(canonical_text(config.noise))},
        {"model", sha256_hex(canonical_text(config.model, config.filter))},
    };
}

} // namespace healthroute
