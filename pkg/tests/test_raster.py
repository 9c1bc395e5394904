"""Image container, coordinate frame, and PGM round-trip behavior."""

import numpy as np
import pytest

from blurmoments import (CoordinateFrame, Image, PgmParseError, load_pgm,
                         sample_bilinear, save_pgm)


def write(tmp_path, payload, name="img.pgm"):
    path = tmp_path / name
    path.write_bytes(payload)
    return path


class TestPgmParsing:
    def test_ascii_values_scale_by_maxval(self, tmp_path):
        path = write(tmp_path, b"P2\n2 2\n255\n0 255\n0 255\n")
        img = load_pgm(path)
        assert img.pixels.tolist() == [[0.0, 1.0], [0.0, 1.0]]

    def test_binary_and_ascii_encodings_agree(self, tmp_path):
        values = np.arange(12, dtype=np.uint8).reshape(3, 4) * 20
        ascii_body = "\n".join(" ".join(str(v) for v in row)
                               for row in values.tolist())
        p2 = write(tmp_path, f"P2\n4 3\n255\n{ascii_body}\n".encode(), "a.pgm")
        p5 = write(tmp_path, b"P5\n4 3\n255\n" + values.tobytes(), "b.pgm")
        assert np.array_equal(load_pgm(p2).pixels, load_pgm(p5).pixels)

    def test_sixteen_bit_binary_is_big_endian(self, tmp_path):
        samples = np.array([[0, 513]], dtype=">u2")
        path = write(tmp_path, b"P5\n2 1\n65535\n" + samples.tobytes())
        img = load_pgm(path)
        assert img.pixels[0, 1] == pytest.approx(513 / 65535, abs=0)

    def test_header_comments_are_skipped(self, tmp_path):
        path = write(tmp_path,
                     b"P2 # magic\n# a comment line\n2 1 # dims\n255\n7 8\n")
        img = load_pgm(path)
        assert img.width == 2 and img.height == 1

    def test_truncated_binary_payload(self, tmp_path):
        path = write(tmp_path, b"P5\n4 4\n255\n" + bytes(15))
        with pytest.raises(PgmParseError, match="truncated payload"):
            load_pgm(path)

    def test_truncated_ascii_payload(self, tmp_path):
        path = write(tmp_path, b"P2\n4 4\n255\n" + b"1 " * 15)
        with pytest.raises(PgmParseError,
                           match="expected 16 samples, got 15"):
            load_pgm(path)

    def test_bad_magic(self, tmp_path):
        path = write(tmp_path, b"P6\n2 2\n255\n" + bytes(12))
        with pytest.raises(PgmParseError, match="magic"):
            load_pgm(path)

    def test_missing_header_field(self, tmp_path):
        path = write(tmp_path, b"P2\n2 2\n")
        with pytest.raises(PgmParseError, match="missing maxval"):
            load_pgm(path)

    def test_non_integer_dimension(self, tmp_path):
        path = write(tmp_path, b"P2\nwide 2\n255\n0 0\n")
        with pytest.raises(PgmParseError, match="not an integer"):
            load_pgm(path)

    def test_zero_maxval(self, tmp_path):
        path = write(tmp_path, b"P2\n2 1\n0\n0 0\n")
        with pytest.raises(PgmParseError, match="maxval is zero"):
            load_pgm(path)

    def test_maxval_above_sixteen_bits(self, tmp_path):
        path = write(tmp_path, b"P2\n1 1\n70000\n1\n")
        with pytest.raises(PgmParseError, match="out of range"):
            load_pgm(path)

    def test_sample_above_maxval(self, tmp_path):
        path = write(tmp_path, b"P2\n2 1\n100\n5 101\n")
        with pytest.raises(PgmParseError, match="exceeds maxval"):
            load_pgm(path)

    def test_errors_carry_the_byte_offset(self, tmp_path):
        payload = b"P2\n2 1\n0\n0 0\n"
        path = write(tmp_path, payload)
        with pytest.raises(PgmParseError) as excinfo:
            load_pgm(path)
        assert excinfo.value.offset == payload.index(b"0")
        assert f"byte offset {excinfo.value.offset}" in str(excinfo.value)

    def test_empty_file(self, tmp_path):
        with pytest.raises(PgmParseError, match="empty file"):
            load_pgm(write(tmp_path, b""))


class TestPgmWriting:
    def test_sixteen_bit_round_trip_quantization_bound(self, tmp_path):
        rng = np.random.default_rng(11)
        img = Image(rng.uniform(0.0, 1.0, (37, 23)))
        path = tmp_path / "rt.pgm"
        save_pgm(img, path, maxval=65535)
        back = load_pgm(path)
        assert np.max(np.abs(back.pixels - img.pixels)) <= 1.0 / 131070

    def test_eight_bit_round_trip_quantization_bound(self, tmp_path):
        rng = np.random.default_rng(12)
        img = Image(rng.uniform(0.0, 1.0, (16, 16)))
        path = tmp_path / "rt8.pgm"
        save_pgm(img, path, maxval=255)
        back = load_pgm(path)
        assert np.max(np.abs(back.pixels - img.pixels)) <= 1.0 / 510

    def test_half_intensity_rounds_up(self, tmp_path):
        # 0.5 * 255 = 127.5 sits exactly between codes; the writer
        # commits to round-half-up, so every sample stores as 128.
        img = Image(np.full((4, 4), 0.5))
        path = tmp_path / "half.pgm"
        save_pgm(img, path, maxval=255)
        samples = np.frombuffer(path.read_bytes().split(b"255\n", 1)[1],
                                dtype=np.uint8)
        assert set(samples.tolist()) == {128}

    def test_negative_intensities_rejected_before_write(self, tmp_path):
        img = Image(np.zeros((2, 2)))
        object.__setattr__(img, "pixels", np.array([[-0.1, 0.0], [0.0, 0.0]]))
        path = tmp_path / "neg.pgm"
        with pytest.raises(ValueError, match="negative"):
            save_pgm(img, path)
        assert not path.exists()

    def test_intensities_above_one_rejected(self, tmp_path):
        img = Image(np.zeros((2, 2)))
        object.__setattr__(img, "pixels", np.array([[1.5, 0.0], [0.0, 0.0]]))
        with pytest.raises(ValueError, match="above 1"):
            save_pgm(img, tmp_path / "big.pgm")

    def test_unsupported_maxval(self, tmp_path):
        with pytest.raises(ValueError, match="maxval must be 255 or 65535"):
            save_pgm(Image(np.ones((2, 2))), tmp_path / "x.pgm", maxval=1023)


class TestImageValidation:
    def test_rejects_non_2d(self):
        with pytest.raises(ValueError, match="2-D"):
            Image(np.zeros(5))

    def test_rejects_nan(self):
        with pytest.raises(ValueError, match="finite"):
            Image(np.array([[0.0, np.nan]]))

    def test_rejects_negative(self):
        with pytest.raises(ValueError, match="non-negative"):
            Image(np.array([[0.0, -1e-9]]))

    def test_pixels_are_frozen_and_decoupled(self):
        src = np.ones((3, 3))
        img = Image(src)
        src[0, 0] = 5.0
        assert img.pixels[0, 0] == 1.0
        with pytest.raises(ValueError):
            img.pixels[0, 0] = 2.0


class TestCoordinateFrame:
    @pytest.mark.parametrize("width,height", [(1, 1), (4, 7), (5, 5), (6, 3)])
    def test_round_trip_is_identity_on_grid(self, width, height):
        frame = CoordinateFrame(width, height)
        for r in range(height):
            for c in range(width):
                x, y = frame.to_xy(r, c)
                assert frame.to_rowcol(x, y) == (r, c)

    def test_axis_vectors_match_pointwise_map(self):
        frame = CoordinateFrame(6, 4)
        assert frame.x_coords().tolist() == [frame.to_xy(0, c)[0]
                                             for c in range(6)]
        assert frame.y_coords().tolist() == [frame.to_xy(r, 0)[1]
                                             for r in range(4)]

    def test_origin_is_raster_center(self):
        frame = CoordinateFrame(5, 3)
        assert frame.to_xy(1, 2) == (0.0, 0.0)


class TestBilinearSampling:
    def test_grid_point_returns_pixel_value(self):
        rng = np.random.default_rng(3)
        img = Image(rng.uniform(0.0, 1.0, (7, 9)))
        frame = img.frame
        for r in range(7):
            for c in range(9):
                x, y = frame.to_xy(r, c)
                assert sample_bilinear(img, x, y) == img.pixels[r, c]

    def test_midpoint_of_horizontal_neighbors_averages(self):
        img = Image(np.array([[0.2, 0.8], [0.4, 0.6]]))
        x, y = img.frame.to_xy(0, 0)
        assert sample_bilinear(img, x + 0.5, y) == pytest.approx(0.5, abs=1e-15)

    def test_far_outside_reads_zero(self):
        img = Image(np.ones((5, 5)))
        assert sample_bilinear(img, 12.0, 0.0) == 0.0
        assert sample_bilinear(img, 0.0, -12.0) == 0.0

    def test_lipschitz_continuity(self):
        rng = np.random.default_rng(8)
        img = Image(rng.uniform(0.0, 1.0, (12, 12)))
        px = img.pixels
        lip = max(np.max(np.abs(np.diff(px, axis=0))),
                  np.max(np.abs(np.diff(px, axis=1))))
        eps = 1e-6
        for _ in range(200):
            x, y = rng.uniform(-6.0, 6.0, 2)
            base = sample_bilinear(img, x, y)
            # 2x covers the corner where both interpolation axes move.
            assert abs(sample_bilinear(img, x + eps, y) - base) <= 2 * lip * eps
            assert abs(sample_bilinear(img, x, y + eps) - base) <= 2 * lip * eps
