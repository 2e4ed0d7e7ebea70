"""Multi-element mesh data model with many-to-many face adjacency.

Elements are axis-aligned rectangles in the Cartesian parent domain, each
carrying polynomial degrees, a node family and a coordinate-map id. The
canonical non-conforming test mesh splits a 4x4 coarse grid of [-1,1]^2 in
half per cell with a checkerboard split axis, so that every coarse-cell
interface carries a 2:1 node mismatch; refinement level n splits every
level-1 element into n x n children.

The mesh file format is a versioned line-oriented plain-text format; see
save_mesh / load_mesh.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

GEOM_TOL = 1e-12

FAMILIES = ("legendre", "lobatto")
MAP_IDS = ("cartesian", "sine", "sine-minus")

FaceId = tuple[int, str]


class MeshValidationError(ValueError):
    pass


class MeshParseError(ValueError):
    pass


@dataclass(frozen=True)
class ElementSpec:
    rect: tuple[float, float, float, float]  # x0, y0, x1, y1
    degrees: tuple[int, int]                 # (N_xi, N_eta)
    family: str
    map_id: str

    def __post_init__(self):
        x0, y0, x1, y1 = self.rect
        if not (x1 > x0 and y1 > y0):
            raise MeshValidationError(f"degenerate element rectangle {self.rect}")
        if self.family not in FAMILIES:
            raise MeshValidationError(f"unknown node family {self.family!r}")
        if self.map_id not in MAP_IDS:
            raise MeshValidationError(f"unknown map id {self.map_id!r}")


@dataclass(frozen=True)
class InterfacePair:
    face_a: FaceId
    face_b: FaceId
    overlap_a: tuple[float, float]  # interval in side-a tangential coordinate
    overlap_b: tuple[float, float]


def face_segment(elem: ElementSpec, tag: str) -> tuple[str, float, float, float]:
    """Return (axis, line coordinate, tangential lo, tangential hi).

    axis is 'x' for North/South faces (tangential coordinate x) and 'y'
    for East/West faces.
    """
    x0, y0, x1, y1 = elem.rect
    if tag == "E":
        return "y", x1, y0, y1
    if tag == "W":
        return "y", x0, y0, y1
    if tag == "N":
        return "x", y1, x0, x1
    if tag == "S":
        return "x", y0, x0, x1
    raise ValueError(f"unknown face tag {tag!r}")


@dataclass
class MeshTopology:
    elements: list[ElementSpec]
    interface_pairs: list[InterfacePair] = field(default_factory=list)
    exterior_faces: list[FaceId] = field(default_factory=list)

    @property
    def num_elements(self) -> int:
        return len(self.elements)

    def all_faces(self) -> list[FaceId]:
        return [(e, t) for e in range(self.num_elements) for t in ("E", "W", "N", "S")]

    def overlaps_of(self, face: FaceId) -> list[InterfacePair]:
        index = self.__dict__.get("_overlap_index")
        if index is None or self.__dict__.get("_overlap_index_size") != len(self.interface_pairs):
            index = {}
            for p in self.interface_pairs:
                index.setdefault(p.face_a, []).append(p)
            self.__dict__["_overlap_index"] = index
            self.__dict__["_overlap_index_size"] = len(self.interface_pairs)
        return index.get(face, [])

    def neighbors(self, m: int) -> set[int]:
        return {p.face_b[0] for p in self.interface_pairs if p.face_a[0] == m}

    def validate(self) -> None:
        seen = {(p.face_a, p.face_b, p.overlap_a, p.overlap_b) for p in self.interface_pairs}
        for p in self.interface_pairs:
            if (p.face_b, p.face_a, p.overlap_b, p.overlap_a) not in seen:
                raise MeshValidationError(
                    f"interface pair {p.face_a}->{p.face_b} has no symmetric partner"
                )
            lo, hi = p.overlap_a
            if hi - lo <= GEOM_TOL:
                raise MeshValidationError(f"empty overlap on pair {p.face_a}->{p.face_b}")
        exterior = set(self.exterior_faces)
        for face in self.all_faces():
            elem, tag = face
            _, _, lo, hi = face_segment(self.elements[elem], tag)
            covered = sum(p.overlap_a[1] - p.overlap_a[0] for p in self.overlaps_of(face))
            length = hi - lo
            if face in exterior:
                if covered > GEOM_TOL:
                    raise MeshValidationError(f"exterior face {face} has interior overlaps")
            elif abs(covered - length) > 1e-12 * max(1.0, length):
                raise MeshValidationError(
                    f"face {face} covered {covered:.17g} of length {length:.17g}"
                )


_OPPOSITE = {"E": "W", "W": "E", "N": "S", "S": "N"}


def build_adjacency(elements: list[ElementSpec]) -> tuple[list[InterfacePair], list[FaceId]]:
    """Derive interface pairs and exterior faces from element geometry."""
    pairs: list[InterfacePair] = []
    faces = [(e, t) for e in range(len(elements)) for t in ("E", "W", "N", "S")]
    segs = {f: face_segment(elements[f[0]], f[1]) for f in faces}

    by_line: dict[tuple[str, float], list[FaceId]] = {}
    for f, (axis, coord, _, _) in segs.items():
        by_line.setdefault((axis, round(coord, 9)), []).append(f)

    covered = {f: 0.0 for f in faces}
    for (axis, _), group in by_line.items():
        for fa in group:
            for fb in group:
                if fa[0] == fb[0] or abs(segs[fa][1] - segs[fb][1]) > GEOM_TOL:
                    continue
                if fb[1] != _OPPOSITE[fa[1]]:
                    continue
                lo = max(segs[fa][2], segs[fb][2])
                hi = min(segs[fa][3], segs[fb][3])
                if hi - lo > GEOM_TOL:
                    pairs.append(InterfacePair(fa, fb, (lo, hi), (lo, hi)))
                    covered[fa] += hi - lo

    exterior = []
    for f in faces:
        _, _, lo, hi = segs[f]
        if covered[f] <= GEOM_TOL:
            exterior.append(f)
        elif abs(covered[f] - (hi - lo)) > 1e-12:
            raise MeshValidationError(f"face {f} is only partially covered")
    return pairs, exterior


def canonical_mesh_fig1(
    refinement_level: int,
    degree: int = 4,
    family: str = "legendre",
    map_id: str = "cartesian",
) -> MeshTopology:
    """Canonical non-conforming multi-element partition of [-1,1]^2.

    Every 0.5 x 0.5 coarse cell is halved, with the split axis alternating
    in a checkerboard, so each coarse-cell interface is 2:1 non-conforming;
    level n further splits each level-1 element into n x n children.
    """
    n = refinement_level
    if n < 1:
        raise ValueError("refinement_level must be >= 1")
    rects = []
    for ci in range(4):
        for cj in range(4):
            x0, y0 = -1 + 0.5 * ci, -1 + 0.5 * cj
            if (ci + cj) % 2 == 0:
                halves = [(x0, y0, x0 + 0.25, y0 + 0.5), (x0 + 0.25, y0, x0 + 0.5, y0 + 0.5)]
            else:
                halves = [(x0, y0, x0 + 0.5, y0 + 0.25), (x0, y0 + 0.25, x0 + 0.5, y0 + 0.5)]
            for hx0, hy0, hx1, hy1 in halves:
                dx, dy = (hx1 - hx0) / n, (hy1 - hy0) / n
                for i in range(n):
                    for j in range(n):
                        rects.append(
                            (hx0 + i * dx, hy0 + j * dy, hx0 + (i + 1) * dx, hy0 + (j + 1) * dy)
                        )
    elements = [
        ElementSpec(rect=r, degrees=(degree, degree), family=family, map_id=map_id)
        for r in rects
    ]
    pairs, exterior = build_adjacency(elements)
    topo = MeshTopology(elements=elements, interface_pairs=pairs, exterior_faces=exterior)
    topo.validate()
    return topo


def single_element_mesh(
    rect=(-1.0, -1.0, 1.0, 1.0), degree=4, family="legendre", map_id="cartesian"
) -> MeshTopology:
    elem = ElementSpec(rect=tuple(map(float, rect)), degrees=(degree, degree),
                       family=family, map_id=map_id)
    topo = MeshTopology(elements=[elem], exterior_faces=[(0, t) for t in "EWNS"])
    topo.validate()
    return topo


def two_element_mesh(
    conforming: bool = True, degree: int = 3, family: str = "legendre",
    map_id: str = "cartesian",
) -> MeshTopology:
    """Two elements sharing the line x=0: one full face, or a 2:1 split."""
    left = ElementSpec((-1.0, -1.0, 0.0, 1.0), (degree, degree), family, map_id)
    if conforming:
        others = [ElementSpec((0.0, -1.0, 1.0, 1.0), (degree, degree), family, map_id)]
    else:
        others = [
            ElementSpec((0.0, -1.0, 1.0, 0.0), (degree, degree), family, map_id),
            ElementSpec((0.0, 0.0, 1.0, 1.0), (degree, degree), family, map_id),
        ]
    elements = [left, *others]
    pairs, exterior = build_adjacency(elements)
    topo = MeshTopology(elements=elements, interface_pairs=pairs, exterior_faces=exterior)
    topo.validate()
    return topo


# ---------------------------------------------------------------------------
# Mesh file format
# ---------------------------------------------------------------------------

_HEADER = "gsbpmesh 1"


def save_mesh(topology: MeshTopology, path) -> None:
    lines = [_HEADER]
    for e in topology.elements:
        x0, y0, x1, y1 = e.rect
        lines.append(
            "element %.17g %.17g %.17g %.17g %d %d %s %s"
            % (x0, y0, x1, y1, e.degrees[0], e.degrees[1], e.family, e.map_id)
        )
    for p in topology.interface_pairs:
        lines.append(
            "interface %d %s %.17g %.17g %d %s %.17g %.17g"
            % (p.face_a[0], p.face_a[1], *p.overlap_a, p.face_b[0], p.face_b[1], *p.overlap_b)
        )
    for elem, tag in topology.exterior_faces:
        lines.append(f"exterior {elem} {tag}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_mesh(path) -> MeshTopology:
    with open(path) as fh:
        raw = fh.read().splitlines()
    if not raw or raw[0].strip() != _HEADER:
        raise MeshParseError(f"{path}:1: expected header {_HEADER!r}")

    elements: list[ElementSpec] = []
    pairs: list[InterfacePair] = []
    exterior: list[FaceId] = []
    for lineno, line in enumerate(raw[1:], start=2):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        kind = tokens[0]
        try:
            if kind == "element":
                if len(tokens) != 9:
                    raise ValueError("expected 8 fields")
                rect = tuple(float(t) for t in tokens[1:5])
                degrees = (int(tokens[5]), int(tokens[6]))
                elements.append(ElementSpec(rect, degrees, tokens[7], tokens[8]))
            elif kind == "interface":
                if len(tokens) != 9:
                    raise ValueError("expected 8 fields")
                pairs.append(
                    InterfacePair(
                        (int(tokens[1]), tokens[2]),
                        (int(tokens[5]), tokens[6]),
                        (float(tokens[3]), float(tokens[4])),
                        (float(tokens[7]), float(tokens[8])),
                    )
                )
            elif kind == "exterior":
                exterior.append((int(tokens[1]), tokens[2]))
            else:
                raise ValueError(f"unknown record kind {kind!r}")
        except (ValueError, MeshValidationError) as exc:
            raise MeshParseError(f"{path}:{lineno}: {exc}") from exc

    topo = MeshTopology(elements=elements, interface_pairs=pairs, exterior_faces=exterior)
    try:
        topo.validate()
    except MeshValidationError as exc:
        raise MeshValidationError(f"{path}: {exc}") from exc
    return topo
