import numpy as np
import pytest

from landmark_ph.images import save_gray
from landmark_ph.pipeline import DatasetManifest, LABELS
from landmark_ph.synthetic import blob_dataset

RING = np.array([[0, 0, 0], [0, 5, 0], [0, 0, 0]], dtype=np.uint8)


@pytest.fixture
def ring():
    return RING.copy()


def write_dataset(directory, images, labels, suffix=".pgm"):
    entries = []
    for i, (img, lab) in enumerate(zip(images, labels)):
        path = directory / f"img{i:02d}{suffix}"
        save_gray(path, img)
        entries.append((str(path), LABELS[int(lab)]))
    manifest = DatasetManifest(entries, source=str(directory / "manifest.csv"))
    manifest.write(directory / "manifest.csv")
    return manifest


@pytest.fixture
def small_manifest(tmp_path):
    images, labels = blob_dataset(n_per_class=3, size=24, seed=5)
    return write_dataset(tmp_path, images, labels)


# --------------------------------------------------------------------------- acceptance summary

_acceptance: dict = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("acceptance")
        if mark is not None:
            item.user_properties.append(("criterion", mark.args))


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or report.outcome != "passed":
        number, title = props["criterion"]
        _acceptance[number] = (title, report.outcome, props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    word = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}
    for number in sorted(_acceptance):
        title, outcome, detail = _acceptance[number]
        line = f"criterion {number}: {word.get(outcome, outcome.upper())}  {title}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
