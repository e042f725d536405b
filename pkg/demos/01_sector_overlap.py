#!/usr/bin/env python3
"""Core geometry walkthrough: build a semi-annular search sector from a
"left 30° to right 10°, roughly 5-20 m away" style observation and score
a building footprint against it.
"""

from autotour.geo_core import AnnularSector, LocalPoint, Polygon, overlap_area, polygon_area

# camera at the origin, heading 0° (true north); the observation spans
# 30° left of heading to 10° right, between 5 and 20 metres out
sector = AnnularSector(
    center=LocalPoint(0.0, 0.0),
    r_inner=5.0, r_outer=20.0,
    bearing_start=330.0, bearing_end=10.0,
)
print(f"sector area (analytic): {sector.area:.2f} m²")

# a 10x10 m building slightly left of the heading, 12 m out
building = Polygon([
    LocalPoint(-9.0, 7.0), LocalPoint(1.0, 7.0),
    LocalPoint(1.0, 17.0), LocalPoint(-9.0, 17.0),
])
a_map = polygon_area(building)
a_overlap = overlap_area(sector, building)
r_norm = a_overlap / a_map

print(f"building footprint:     {a_map:.2f} m²")
print(f"overlap with sector:    {a_overlap:.2f} m²")
print(f"normalized ratio r_norm: {r_norm:.3f}")
print("matched!" if r_norm >= 0.02 else "below threshold")
