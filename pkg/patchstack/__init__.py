"""PatchStack - extrinsic contact patch estimation and stacking simulator"""

__version__ = "1.0.0"
