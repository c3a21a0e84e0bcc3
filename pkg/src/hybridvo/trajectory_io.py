"""TUM trajectory file I/O.

One pose per line: "timestamp tx ty tz qx qy qz qw", whitespace separated,
'#' starts a comment. Values are written with Python's shortest round-trip
float representation, so read(write(x)) preserves every parsed value exactly.
"""

from __future__ import annotations

import numpy as np

from .alignment import TrajectorySegment
from .errors import ScenarioError
from .geometry import RigidPose, quat_to_rotation, rotation_to_quat


def read_tum(path) -> TrajectorySegment:
    """Parse a TUM file; entry ids are consecutive line indices."""
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            if len(fields) != 8:
                raise ScenarioError(
                    f"{path}:{lineno}: expected 8 fields, got {len(fields)}"
                )
            try:
                values = [float(f) for f in fields]
            except ValueError as exc:
                raise ScenarioError(f"{path}:{lineno}: {exc}") from exc
            t, tx, ty, tz = values[0], values[1], values[2], values[3]
            quat = values[4:8]
            if abs(np.linalg.norm(quat) - 1.0) > 1e-6:
                raise ScenarioError(
                    f"{path}:{lineno}: quaternion norm {np.linalg.norm(quat):.6f} != 1"
                )
            pose = RigidPose(quat_to_rotation(quat), np.array([tx, ty, tz]))
            entries.append((len(entries), t, pose))
    if not entries:
        raise ScenarioError(f"{path}: no trajectory entries")
    return TrajectorySegment.from_entries(entries)


def write_tum(path, segment: TrajectorySegment, header: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for t, pose in zip(segment.timestamps, segment.poses):
            q = rotation_to_quat(pose.rotation)
            values = [t, *pose.translation, *q]
            fh.write(" ".join(repr(float(v)) for v in values) + "\n")
