"""Great-circle distance for the geospatial query function."""

from __future__ import annotations

import math

from .errors import CypherExecutionError

EARTH_RADIUS_KM = 6371.0


def geodist_km(lon1: float, lat1: float, lon2: float, lat2: float) -> float:
    """Haversine distance in kilometers between two (longitude, latitude) points.

    Coordinates are degrees; longitude in [-180, 180], latitude in [-90, 90].
    Out-of-range input raises CypherExecutionError.
    """
    for lon, lat in ((lon1, lat1), (lon2, lat2)):
        if not -180.0 <= lon <= 180.0:
            raise CypherExecutionError(f"longitude {lon} out of range [-180, 180]")
        if not -90.0 <= lat <= 90.0:
            raise CypherExecutionError(f"latitude {lat} out of range [-90, 90]")
    phi1 = math.radians(lat1)
    phi2 = math.radians(lat2)
    dphi = math.radians(lat2 - lat1)
    dlam = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(a)))
