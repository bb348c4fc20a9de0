"""vibmap: decode ground materials, conditions and gait from on-foot
vibration recordings, and fuse geolocated predictions into a haptic map."""

__version__ = "0.1.0"
