import tempfile
from pathlib import Path
from unittest import TestCase

import numpy as np
from numpy.testing import assert_array_equal

from octlio.errors import InputError
from octlio.geom import ImuSample, Pose, Scan
from octlio.pipeline import FrameResult
from octlio.synthbench import (
    METRICS_HEADER,
    TIMING_HEADER,
    read_dataset,
    read_groundtruth,
    read_imu,
    read_metrics,
    read_scan,
    read_timing,
    write_dataset,
    write_metrics,
    write_timing,
)


def sample_scans() -> list[Scan]:
    rng = np.random.default_rng(0)
    return [
        Scan(0.1, rng.normal(size=(5, 3)), np.linspace(0.0, 0.1, 5), 0.1),
        Scan(0.2, np.zeros((0, 3)), np.zeros(0), 0.1),
        Scan(0.3, [[-0.0, 1.0 / 3.0, 1e-20]], [0.05], 0.1),
    ]


class TestDataset(TestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.root = Path(self.directory.name) / "data"

    def tearDown(self):
        self.directory.cleanup()

    def test_reads_back_exactly(self):
        scans = sample_scans()
        imu = [ImuSample(i / 200, np.array([0.1, 0.2, 9.81]) * i, np.array([1e-3, 0.0, -2e-3])) for i in range(5)]
        gt = [(0.1, Pose.identity()), (0.2, Pose.identity())]
        self.assertEqual(self.root, write_dataset(self.root, scans, imu, gt))
        self.assertTrue((self.root / "scans" / "000002.csv").exists())

        loaded_scans, loaded_imu = read_dataset(self.root)
        self.assertEqual(len(scans), len(loaded_scans))
        for scan, loaded in zip(scans, loaded_scans):
            self.assertEqual(scan.t_end, loaded.t_end)
            self.assertEqual(scan.duration, loaded.duration)
            assert_array_equal(scan.points, loaded.points)
            assert_array_equal(scan.t_off, loaded.t_off)
        for sample, loaded in zip(imu, loaded_imu, strict=True):
            self.assertEqual(sample.t, loaded.t)
            assert_array_equal(sample.acc, loaded.acc)
            assert_array_equal(sample.gyr, loaded.gyr)
        self.assertEqual([0.1, 0.2], [t for t, _ in read_groundtruth(self.root)])

    def test_index_file(self):
        write_dataset(self.root, sample_scans()[:1], [], [])
        lines = (self.root / "scans.csv").read_text(encoding="utf-8").splitlines()
        self.assertEqual(["index,t_end,duration,file", "0,0.1,0.1,scans/000000.csv"], lines)

    def test_negative_zero_is_written_as_zero(self):
        write_dataset(self.root, sample_scans()[2:], [], [])
        row = (self.root / "scans" / "000000.csv").read_text(encoding="utf-8").splitlines()[1]
        self.assertTrue(row.startswith("0.0,"))

    def test_missing_directory(self):
        self.assertRaises(OSError, read_dataset, self.root)


class TestMalformedFiles(TestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.path = Path(self.directory.name) / "file.csv"

    def tearDown(self):
        self.directory.cleanup()

    def test_empty_file(self):
        self.path.write_text("", encoding="utf-8")
        self.assertRaises(InputError, read_imu, self.path)

    def test_wrong_header(self):
        self.path.write_text("x,y,z\n1,2,3\n", encoding="utf-8")
        self.assertRaises(InputError, read_scan, self.path, 0.1, 0.1)

    def test_wrong_field_count(self):
        self.path.write_text("x,y,z,t_off\n1,2,3\n", encoding="utf-8")
        self.assertRaises(InputError, read_scan, self.path, 0.1, 0.1)

    def test_not_a_number(self):
        self.path.write_text("x,y,z,t_off\n1,2,three,0\n", encoding="utf-8")
        self.assertRaises(InputError, read_scan, self.path, 0.1, 0.1)

    def test_offset_outside_sweep(self):
        self.path.write_text("x,y,z,t_off\n1,2,3,0.5\n", encoding="utf-8")
        self.assertRaises(InputError, read_scan, self.path, 1.0, 0.1)


class TestResultFiles(TestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.root = Path(self.directory.name)
        self.results = [
            FrameResult(9, 1.0, Pose.identity(), elapsed_ms=12.3456, n_points=300, cpu_util=0.9),
            FrameResult(
                10,
                1.1,
                Pose.identity(),
                elapsed_ms=8.0,
                n_points=310,
                n_valid_corr=290,
                knn_candidates_evaluated=4000,
                iterations_used=3,
                cpu_util=1.0,
            ),
        ]

    def tearDown(self):
        self.directory.cleanup()

    def test_metrics(self):
        path = self.root / "metrics.csv"
        write_metrics(self.results, path)
        lines = path.read_text(encoding="utf-8").splitlines()
        self.assertEqual(",".join(METRICS_HEADER), lines[0])
        self.assertEqual("10,1.100000000,8.000,310,290,4000,3", lines[2])
        columns = read_metrics(path)
        assert_array_equal([9, 10], columns["frame"])
        assert_array_equal([12.346, 8.0], columns["elapsed_ms"])

    def test_timing(self):
        path = self.root / "timing.csv"
        write_timing(self.results, path)
        lines = path.read_text(encoding="utf-8").splitlines()
        self.assertEqual(",".join(TIMING_HEADER), lines[0])
        self.assertEqual(
            "frame,elapsed_ms,cpu_util,propagate_ms,deskew_ms,downsample_ms,update_ms,map_ms", lines[0]
        )
        self.assertEqual("9,12.346,0.9000,0.000,0.000,0.000,0.000,0.000", lines[1])
        assert_array_equal([0.9, 1.0], read_timing(path)["cpu_util"])

    def test_no_frames(self):
        path = self.root / "metrics.csv"
        write_metrics([], path)
        self.assertEqual(0, len(read_metrics(path)["frame"]))
