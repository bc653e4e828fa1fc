"""Tests for PGM loading, stippling and SVG export."""

import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from PIL import Image

from rieszflow.errors import DegenerateImageError, DomainError, PgmParseError
from rieszflow.halftone import (
    SVG_NS,
    HalftoneConfig,
    PixelMeasure,
    export_svg,
    load_pgm,
    run_halftone,
    save_pgm,
)
from rieszflow.measures import DiscreteMeasure


def circles(svg: str):
    return ET.fromstring(svg).findall(f"{{{SVG_NS}}}circle")


class TestLoadPgm:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "two.pgm"
        save_pgm(path, np.array([[0, 255]], dtype=np.uint8))
        image = load_pgm(path)
        assert (image.width, image.height) == (2, 1)
        np.testing.assert_allclose(image.weights, [1.0, 0.0])
        np.testing.assert_allclose(image.positions, [[0.5, 0.5], [1.5, 0.5]])
        assert image.aspect == 2.0
        assert image.center == (1.0, 0.5)

    def test_plain_format(self, tmp_path):
        path = tmp_path / "plain.pgm"
        path.write_bytes(b"P2\n2 2\n255\n0 255\n128 255\n")
        image = load_pgm(path)
        np.testing.assert_allclose(image.weights, [255 / 382, 0.0, 127 / 382, 0.0])
        np.testing.assert_allclose(image.positions[0], [0.25, 0.75])
        np.testing.assert_allclose(image.positions[2], [0.25, 0.25])

    def test_sixteen_bit(self, tmp_path):
        path = tmp_path / "deep.pgm"
        path.write_bytes(b"P5\n2 1\n65535\n" + bytes([0x00, 0x00, 0xFF, 0xFF]))
        image = load_pgm(path)
        np.testing.assert_allclose(image.weights, [1.0, 0.0])

    def test_header_maxval_sets_the_full_scale(self, tmp_path):
        plain = tmp_path / "seven.pgm"
        plain.write_bytes(b"P2\n# three levels\n3 1\n7\n0 3 7\n")
        np.testing.assert_allclose(
            load_pgm(plain).weights, [7 / 11, 4 / 11, 0.0], rtol=0, atol=1e-15
        )

        deep = tmp_path / "thousand.pgm"
        deep.write_bytes(b"P5 3 1 1000\n" + bytes([0x00, 0x00, 0x01, 0x9C, 0x03, 0xE8]))
        np.testing.assert_allclose(
            load_pgm(deep).weights, [1000 / 1588, 588 / 1588, 0.0], rtol=0, atol=1e-15
        )

    def test_samples_above_maxval(self, tmp_path):
        path = tmp_path / "over.pgm"
        path.write_bytes(b"P2\n2 1\n7\n0 8\n")
        with pytest.raises(PgmParseError, match="maxval"):
            load_pgm(path)

        short = tmp_path / "short.pgm"
        short.write_bytes(b"P5\n4 4\n255\n" + bytes(3))
        with pytest.raises(PgmParseError):
            load_pgm(short)

    def test_white_image_is_degenerate(self, tmp_path):
        path = tmp_path / "white.pgm"
        save_pgm(path, np.full((3, 4), 255, dtype=np.uint8))
        with pytest.raises(DegenerateImageError):
            load_pgm(path)

    def test_malformed_files(self, tmp_path):
        garbage = tmp_path / "garbage.pgm"
        garbage.write_bytes(b"not an image at all")
        with pytest.raises(PgmParseError):
            load_pgm(garbage)

        color = tmp_path / "color.ppm"
        Image.new("RGB", (2, 2)).save(color, format="PPM")
        with pytest.raises(PgmParseError):
            load_pgm(color)

        with pytest.raises(PgmParseError):
            load_pgm(tmp_path / "missing.pgm")

    def test_save_requires_uint8(self, tmp_path):
        with pytest.raises(DomainError):
            save_pgm(tmp_path / "bad.pgm", np.zeros((2, 2)))
        with pytest.raises(DomainError):
            save_pgm(tmp_path / "bad.pgm", np.zeros(4, dtype=np.uint8))


class TestPixelMeasure:
    def test_from_gray(self):
        image = PixelMeasure.from_gray(np.array([[0, 100], [200, 255]]), 255)
        np.testing.assert_allclose(image.weights, np.array([255, 155, 55, 0]) / 465)
        assert image.weights.sum() == pytest.approx(1.0)

    def test_validation(self):
        with pytest.raises(DomainError):
            PixelMeasure(1, 2, [0.5, 0.5], [[0.5, 0.5]])
        with pytest.raises(DomainError):
            PixelMeasure(2, 1, [1.5, -0.5], [[0.5, 0.5], [1.5, 0.5]])

    def test_subsample_keeps_mass(self, rng):
        gray = rng.integers(0, 256, size=(3, 5))
        gray[0, 0] = 0
        image = PixelMeasure.from_gray(gray, 255)
        coarse = image.subsample(2)
        assert (coarse.width, coarse.height) == (3, 2)
        assert coarse.weights.sum() == pytest.approx(1.0)
        expected = image.weights[[0, 1, 5, 6]].sum()
        assert coarse.weights[0] == pytest.approx(expected)
        # block centre of pixels (0..1, 0..1) in a height-3 image
        np.testing.assert_allclose(coarse.positions[0], [1.0 / 3.0, 2.0 / 3.0])
        assert coarse.aspect == image.aspect
        assert image.subsample(1) is image
        with pytest.raises(DomainError):
            image.subsample(0)

    def test_as_measure_drops_empty_pixels(self):
        image = PixelMeasure.from_gray(np.array([[0, 255, 51]]), 255)
        target = image.as_measure()
        assert target.size == 2
        np.testing.assert_allclose(target.weights, [255 / 459, 204 / 459])


class TestRunHalftone:
    def test_config(self):
        image = PixelMeasure.from_gray(np.array([[0, 255]]), 255)
        with pytest.raises(DomainError):
            HalftoneConfig(image=image, M=0, steps=1)
        with pytest.raises(DomainError):
            HalftoneConfig(image=image, M=1, steps=1, stride=0)
        sim = HalftoneConfig(image=image, M=4, steps=1).sim_config()
        assert sim.r == 1.0 and sim.d == 2
        assert sim.center == (1.0, 0.5)
        assert sim.target.size == 1

    def test_dots_settle_on_the_dark_half(self):
        gray = np.full((16, 32), 255, dtype=np.uint8)
        gray[:, :16] = 0
        image = PixelMeasure.from_gray(gray, 255)
        cfg = HalftoneConfig(
            image=image,
            M=50,
            steps=300,
            tau0=0.001,
            tau_max=0.01,
            half_width=0.3,
            strict_energy=False,
        )
        dots, log = run_halftone(cfg)
        assert dots.size == 50
        assert np.mean(dots.points[:, 0] < 1.0) >= 0.8
        assert log.energies[-1].discrepancy < log.energies[0].discrepancy

    @pytest.mark.slow
    def test_gradient_image_halves_the_discrepancy(self):
        gray = np.tile((4 * np.arange(64)).astype(np.uint8), (64, 1))
        image = PixelMeasure.from_gray(gray, 255)
        dots, log = run_halftone(HalftoneConfig(image=image, M=256, steps=70))
        assert dots.size == 256
        assert log.violations == 0
        assert log.energies[-1].discrepancy < 0.5 * log.energies[0].discrepancy

    @pytest.mark.slow
    def test_constant_image_spreads_dots_evenly(self):
        image = PixelMeasure.from_gray(np.full((32, 32), 128), 255)
        cfg = HalftoneConfig(image=image, M=256, steps=120, strict_energy=False)
        dots, _ = run_halftone(cfg)
        counts, _, _ = np.histogram2d(
            dots.points[:, 0], dots.points[:, 1], bins=4, range=[[0, 1], [0, 1]]
        )
        expected = 256 / 16
        chi2 = float(np.sum((counts - expected) ** 2) / expected)
        # 15 degrees of freedom: mean 15, standard deviation sqrt(30)
        assert chi2 <= 15 + 4 * math.sqrt(30)

    def test_single_dot(self):
        image = PixelMeasure.from_gray(np.array([[0, 0], [0, 0]]), 255)
        dots, log = run_halftone(HalftoneConfig(image=image, M=1, steps=3))
        assert dots.size == 1
        assert log.final.step == 3


class TestExportSvg:
    def test_circles(self):
        dots = DiscreteMeasure.uniform([[1.0, 0.5], [0.0, 0.0], [2.0, 1.0]])
        svg = export_svg(dots, 1.5, (200.0, 100.0), aspect=2.0)
        root = ET.fromstring(svg)
        assert root.get("width") == "200"
        assert root.get("viewBox") == "0 0 200 100"
        found = circles(svg)
        assert len(found) == 3
        assert float(found[0].get("cx")) == pytest.approx(100.0)
        assert float(found[0].get("cy")) == pytest.approx(50.0)
        assert float(found[1].get("cy")) == pytest.approx(100.0)
        assert float(found[2].get("cx")) == pytest.approx(200.0)
        assert float(found[2].get("r")) == 1.5

    def test_empty(self):
        assert circles(export_svg(np.empty((0, 2)), 1.0, (10.0, 10.0))) == []
