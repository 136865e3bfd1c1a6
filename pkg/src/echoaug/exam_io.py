"""On-disk layout for EF exams.

Each exam is one subdirectory named after the patient id, containing
per-cycle mask + metadata records named
``<view>_cyc<k>_<phase>_msk.png`` / ``..._meta.txt`` with view in
{a2c, a4c} and phase in {ed, es}, plus an optional ``manual_ef.txt``
holding the reference EF fraction.
"""

import re
from pathlib import Path

from . import frame_io
from .ef import Cycle, ExamRecord, PhaseFrame

_RECORD = re.compile(r"^(a2c|a4c)_cyc(\d+)_(ed|es)_msk\.png$")


def _load_phase(directory, view, cycle, phase):
    stem = f"{view}_cyc{cycle}_{phase}"
    mask = frame_io.load_mask_png(directory / f"{stem}_msk.png")
    geometry = frame_io.load_metadata(directory / f"{stem}_meta.txt", image_size=mask.shape)
    return PhaseFrame(mask=mask, geometry=geometry)


def load_exam(directory):
    directory = Path(directory)
    cycles = {"a2c": set(), "a4c": set()}
    for p in directory.iterdir():
        m = _RECORD.match(p.name)
        if m:
            cycles[m.group(1)].add(int(m.group(2)))
    views = {}
    for view, indices in cycles.items():
        views[view] = [
            Cycle(
                ed=_load_phase(directory, view, k, "ed"),
                es=_load_phase(directory, view, k, "es"),
            )
            for k in sorted(indices)
        ]
    manual_path = directory / "manual_ef.txt"
    manual = float(manual_path.read_text().strip()) if manual_path.exists() else None
    return ExamRecord(
        patient_id=directory.name,
        a2c=views["a2c"],
        a4c=views["a4c"],
        manual_ef=manual,
    )


def load_exams(root):
    """All exams under a root directory, sorted by patient id."""
    root = Path(root)
    return [load_exam(d) for d in sorted(root.iterdir()) if d.is_dir()]
