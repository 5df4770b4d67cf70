"""lutobf: obfuscation flow turning LUT netlists into hybrid
reconfigurable/static circuits, plus attacker-side analyses."""

__version__ = "0.1.0"
