"""Night-to-day adversarial scene translation plus single-shot multibox detection."""

__version__ = "0.1.0"
