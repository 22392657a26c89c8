#!/usr/bin/env python3
"""Regenerates the route catalog fixtures in this directory.

tarragona_routes.csv: route_a and route_k carry the reference Tarragona values (endpoints,
distance, elevation gain, pavement, status). The other nine routes and all checkpoints are
fixtures with plausible values around the city.

barcelona_routes.csv: 28 designed fixture routes around Barcelona.

Endpoints are placed so the straight-line distance stays below the declared route distance.
"""

import math
import random
from pathlib import Path

EARTH_RADIUS_KM = 6371.0
HERE = Path(__file__).resolve().parent


def dms(value, positive, negative):
    hemi = positive if value >= 0 else negative
    units = round(abs(value) * 3600 * 100)
    deg, rem = divmod(units, 3600 * 100)
    minutes, sec = divmod(rem, 60 * 100)
    return f"{deg}°{minutes}'{sec / 100:.2f}\"{hemi}"


def point(lat, lon):
    return f"{dms(lat, 'N', 'S')} {dms(lon, 'E', 'W')}"


def parse_dms(text):
    deg, rest = text.split("°")
    minutes, rest = rest.split("'")
    sec, hemi = rest.split('"')
    value = int(deg) + int(minutes) / 60 + float(sec) / 3600
    return -value if hemi in "SW" else value


def haversine(a, b):
    p1, p2 = math.radians(a[0]), math.radians(b[0])
    dp, dl = p2 - p1, math.radians(b[1] - a[1])
    h = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(math.sqrt(h))


def offset(lat, lon, km, bearing_deg):
    b = math.radians(bearing_deg)
    dlat = km * math.cos(b) / 111.195
    dlon = km * math.sin(b) / (111.195 * math.cos(math.radians(lat)))
    return lat + dlat, lon + dlon


def csv_quote(text):
    return '"' + text.replace('"', '""') + '"'


def make_route(rng, rid, centre, distance, elevation, pavement, status, endpoints=None):
    lat0, lon0 = offset(*centre, rng.uniform(0.5, 3.0), rng.uniform(0, 360))
    straight = distance * rng.uniform(0.35, 0.7)
    bearing = rng.uniform(0, 360)
    lat1, lon1 = offset(lat0, lon0, straight, bearing)
    if endpoints:
        (lat0, lon0), (lat1, lon1) = endpoints
        bearing = math.degrees(math.atan2((lon1 - lon0) * math.cos(math.radians(lat0)), lat1 - lat0))
    checkpoints = []
    for i in range(rng.randint(1, 3)):
        t = (i + 1) / 4
        jitter = offset(lat0 + t * (lat1 - lat0), lon0 + t * (lon1 - lon0),
                        rng.uniform(0.05, 0.3), bearing + 90)
        checkpoints.append(jitter)
    return {
        "id": rid,
        "start": (lat0, lon0),
        "end": (lat1, lon1),
        "checkpoints": checkpoints,
        "distance": distance,
        "elevation": elevation,
        "pavement": pavement,
        "status": status,
    }


def write(path, routes, fixed_points=None):
    fixed_points = fixed_points or {}
    lines = ["id,start,end,checkpoints,distance_km,elevation_gain_m,pavement,status"]
    for r in routes:
        start, end = fixed_points.get(r["id"], (point(*r["start"]), point(*r["end"])))
        s = (parse_dms(start.split()[0]), parse_dms(start.split()[1]))
        e = (parse_dms(end.split()[0]), parse_dms(end.split()[1]))
        assert haversine(s, e) < r["distance"], r["id"]
        cps = ";".join(point(*c) for c in r["checkpoints"])
        lines.append(",".join([
            r["id"], csv_quote(start), csv_quote(end), csv_quote(cps),
            f"{r['distance']:g}", f"{r['elevation']:g}", r["pavement"], r["status"],
        ]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def tarragona():
    rng = random.Random(11)
    centre = (41.1189, 1.2445)
    specs = [
        ("route_a", 9.6, 0, "VeryGood", "Idle"),
        ("route_b", 4.1, 12, "Good", "Idle"),
        ("route_c", 6.8, 85, "Average", "Idle"),
        ("route_d", 3.5, 30, "VeryGood", "Idle"),
        ("route_e", 7.9, 140, "Poor", "Caution"),
        ("route_f", 5.2, 20, "Good", "Idle"),
        ("route_g", 2.9, 65, "Average", "Idle"),
        ("route_h", 8.4, 45, "Good", "Idle"),
        ("route_i", 4.7, 110, "VeryPoor", "Caution"),
        ("route_j", 6.1, 8, "VeryGood", "Idle"),
        ("route_k", 2.32, 55, "Average", "Caution"),
    ]
    published = {
        "route_a": ("41°4'44.54\"N 1°12'49.58\"E", "41°6'32.82\"N 1°14'58.55\"E"),
        "route_k": ("41°7'45.65\"N 1°14'32.90\"E", "41°8'8.21\"N 1°14'59.02\"E"),
    }

    def endpoints(rid):
        if rid not in published:
            return None
        return [tuple(parse_dms(c) for c in p.split()) for p in published[rid]]

    routes = [make_route(rng, spec[0], centre, *spec[1:], endpoints=endpoints(spec[0]))
              for spec in specs]
    write(HERE / "tarragona_routes.csv", routes, published)


def barcelona():
    rng = random.Random(28)
    centre = (41.3874, 2.1686)
    pavements = ["VeryPoor", "Poor", "Average", "Good", "VeryGood"]
    routes = []
    for i in range(1, 29):
        distance = round(rng.uniform(1.5, 12.0), 2)
        elevation = round(rng.choice([0, 0, 5, 10]) + rng.uniform(0, 1) ** 2 * 180)
        pavement = rng.choices(pavements, weights=[1, 2, 4, 5, 3])[0]
        status = "Caution" if rng.random() < 0.2 else "Idle"
        routes.append(make_route(rng, f"bcn_{i:02d}", centre, distance, elevation, pavement, status))
    write(HERE / "barcelona_routes.csv", routes)


if __name__ == "__main__":
    tarragona()
    barcelona()
