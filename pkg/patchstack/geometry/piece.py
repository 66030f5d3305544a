from dataclasses import dataclass

from patchstack.geometry.shapes import ORIGIN, Point2, Shape2, shape_from_config


@dataclass(frozen=True)
class Piece:
    """A named object face: contact shape, CoM projection (own frame) and mass in grams"""
    name: str
    shape: Shape2
    com: Point2 = ORIGIN
    mass: float = 1.0

    def reach(self) -> float:
        return self.shape.reach()

    def to_config(self) -> dict:
        return {"name": self.name, "shape": self.shape.to_config(), "com": [self.com.x, self.com.y], "mass": self.mass}

    @classmethod
    def from_config(cls, data: dict) -> "Piece":
        return cls(
            name=str(data["name"]),
            shape=shape_from_config(data["shape"]),
            com=Point2.of(data.get("com", (0.0, 0.0))),
            mass=float(data.get("mass", 1.0)),
        )
