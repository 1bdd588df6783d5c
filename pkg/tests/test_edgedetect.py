import numpy as np
import pytest

from barkline import kernels
from barkline.edgedetect import (GY1, GY2, AllSegmentsFilteredError, Boundary,
                                 EdgeDetectParams, EdgePointSet, EdgeSegment,
                                 NoEdgeError, convolve3x3, edge_strength,
                                 extract_boundary_points, filter_segments)
from barkline.imagecore import ClassMask, GrayImage


def _gray(arr):
    return GrayImage(np.asarray(arr, dtype=np.uint8))


def _band_mask(width=100, height=60, top=10, bottom=20):
    """Panel rows [top, bottom), full width."""
    arr = np.zeros((height, width), np.uint8)
    arr[top:bottom, :] = 1
    return ClassMask(arr)


class TestKernels:
    def test_pair_is_antisymmetric(self):
        assert (GY2 == -GY1).all()

    def test_zero_sum(self):
        assert GY1.sum() == 0 and GY2.sum() == 0


class TestConvolve:
    def test_constant_image_zero_response(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            v = int(rng.integers(0, 256))
            img = _gray(np.full((6, 7), v))
            for k in (GY1, GY2):
                assert (convolve3x3(img, k).data == 0).all()

    def test_dark_to_light_transition(self):
        # rows 0-1 value 0, rows 2-4 value 1
        img = _gray(np.repeat([[0], [0], [1], [1], [1]], 5, axis=1))
        r1 = convolve3x3(img, GY1).data
        r2 = convolve3x3(img, GY2).data
        assert (r1[2, 1:4] == -3).all()
        assert (r2[2, 1:4] == 3).all()

    def test_light_to_dark_transition(self):
        img = _gray(np.repeat([[1], [1], [1], [0], [0]], 5, axis=1))
        r1 = convolve3x3(img, GY1).data
        assert (r1[3, 1:4] == 3).all()

    def test_antisymmetry_on_random_images(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            img = _gray(rng.integers(0, 256, (10, 12)))
            r1 = convolve3x3(img, GY1).data
            r2 = convolve3x3(img, GY2).data
            assert (r1 + r2 == 0).all()

    def test_too_small_image(self):
        with pytest.raises(ValueError):
            convolve3x3(_gray(np.zeros((2, 5))), GY1)

    def test_replicate_padding_no_frame_edges(self):
        # constant columns: replicate padding must not inject border response
        img = _gray(np.full((5, 5), 200))
        assert (convolve3x3(img, GY1).data == 0).all()


class TestEdgeStrength:
    def test_zero(self):
        from barkline.imagecore import SignedResponseImage

        z = SignedResponseImage(np.zeros((3, 3), np.int32))
        assert (edge_strength(z, z) == 0).all()

    def test_formula(self):
        from barkline.imagecore import SignedResponseImage

        r1 = SignedResponseImage(np.array([[-3]], np.int32))
        r2 = SignedResponseImage(np.array([[3]], np.int32))
        assert edge_strength(r1, r2)[0, 0] == pytest.approx(np.sqrt(18))
        # sign-symmetric
        assert edge_strength(r2, r1)[0, 0] == pytest.approx(np.sqrt(18))

    def test_dimension_mismatch(self):
        from barkline.imagecore import SignedResponseImage

        a = SignedResponseImage(np.zeros((3, 3), np.int32))
        b = SignedResponseImage(np.zeros((3, 4), np.int32))
        with pytest.raises(ValueError):
            edge_strength(a, b)


class TestBackends:
    """Both kernel backends must be bit-identical."""

    @pytest.mark.skipif("native" not in kernels.available_backends(),
                        reason="native extension not built")
    def test_convolve_equivalence(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            h, w = rng.integers(3, 50, 2)
            img = rng.integers(0, 256, (h, w), dtype=np.uint8)
            for k in (GY1, GY2):
                a = kernels.convolve3x3(img, k, backend="python")
                b = kernels.convolve3x3(img, k, backend="native")
                assert (a == b).all()

    @pytest.mark.skipif("native" not in kernels.available_backends(),
                        reason="native extension not built")
    def test_boundary_rows_equivalence(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            h, w = rng.integers(3, 50, 2)
            img = (rng.integers(0, 2, (h, w), dtype=np.uint8) * 255)
            r1 = kernels.convolve3x3(img, GY1)
            r2 = kernels.convolve3x3(img, GY2)
            for thr in (0.0, 1.0, 400.0):
                up_p, lo_p = kernels.boundary_rows(r1, r2, thr, backend="python")
                up_n, lo_n = kernels.boundary_rows(r1, r2, thr, backend="native")
                assert (up_p == up_n).all() and (lo_p == lo_n).all()


class TestExtractBoundaryPoints:
    def test_band_mask(self):
        pts = extract_boundary_points(_band_mask(), EdgeDetectParams())
        assert len(pts.upper) == 1 and len(pts.lower) == 1
        up, lo = pts.upper[0], pts.lower[0]
        assert len(up) == 100 and len(lo) == 100
        assert np.abs(up.ys - 10).max() <= 1
        assert np.abs(lo.ys - 19).max() <= 1

    def test_upper_above_lower(self):
        pts = extract_boundary_points(_band_mask(), EdgeDetectParams())
        assert (pts.upper[0].ys < pts.lower[0].ys).all()

    def test_all_panel_mask_errors(self):
        m = ClassMask(np.ones((20, 20), np.uint8))
        with pytest.raises(NoEdgeError):
            extract_boundary_points(m, EdgeDetectParams())

    def test_all_background_mask_errors(self):
        m = ClassMask(np.zeros((20, 20), np.uint8))
        with pytest.raises(NoEdgeError):
            extract_boundary_points(m, EdgeDetectParams())

    def test_single_deleted_column_splits_at_tight_tolerance(self):
        # a column with no panel pixels yields no boundary point, so a
        # 1-column hole splits the segment when gap_tolerance is 1 ...
        arr = _band_mask().labels.copy()
        arr[:, 50] = 0
        pts = extract_boundary_points(
            ClassMask(arr), EdgeDetectParams(gap_tolerance=1))
        assert len(pts.upper) == 2
        assert 50 not in pts.pooled(Boundary.UPPER)[0]

    def test_single_deleted_column_bridged_by_default_tolerance(self):
        # ... but the default gap_tolerance of 2 bridges it
        arr = _band_mask().labels.copy()
        arr[:, 50] = 0
        pts = extract_boundary_points(ClassMask(arr), EdgeDetectParams())
        assert len(pts.upper) == 1

    def test_three_deleted_columns_split_segments(self):
        arr = _band_mask().labels.copy()
        arr[:, 49:52] = 0
        pts = extract_boundary_points(
            ClassMask(arr), EdgeDetectParams(gap_tolerance=1))
        assert len(pts.upper) == 2
        assert pts.upper[0].xs.max() < 50 < pts.upper[1].xs.min()

    def test_horizontal_flip_mirrors_x(self):
        m = _band_mask(width=40)
        arr = m.labels.copy()
        arr[:, :5] = 0  # make it asymmetric
        m = ClassMask(arr)
        params = EdgeDetectParams()
        pts = extract_boundary_points(m, params)
        flipped = extract_boundary_points(ClassMask(arr[:, ::-1].copy()), params)
        ux, uy = pts.pooled(Boundary.UPPER)
        fx, fy = flipped.pooled(Boundary.UPPER)
        order = np.argsort((m.width - 1) - ux)
        assert (fx == (m.width - 1) - ux[order]).all()
        assert (fy == uy[order]).all()

    def test_vertical_mirror_swaps_boundaries(self):
        m = _band_mask()
        params = EdgeDetectParams()
        pts = extract_boundary_points(m, params)
        mirrored = extract_boundary_points(
            ClassMask(m.labels[::-1, :].copy()), params)
        h = m.height
        ux, uy = pts.pooled(Boundary.UPPER)
        mlx, mly = mirrored.pooled(Boundary.LOWER)
        assert (mlx == ux).all()
        assert (mly == (h - 1) - uy).all()


class TestFilterSegments:
    def _point_set(self, lengths, boundary=Boundary.UPPER):
        segs = []
        x0 = 0
        for n in lengths:
            xs = np.arange(x0, x0 + n)
            segs.append(EdgeSegment(xs, np.full(n, 5), boundary))
            x0 += n + 10
        return EdgePointSet(tuple(segs), (), (1000, 100))

    def test_short_segments_dropped(self):
        pts = self._point_set([150, 5])
        out = filter_segments(pts, EdgeDetectParams(min_segment_length=20))
        assert len(out.upper) == 1 and len(out.upper[0]) == 150

    def test_noop_when_all_long(self):
        pts = self._point_set([30, 40])
        out = filter_segments(pts, EdgeDetectParams(min_segment_length=20))
        assert out.upper == pts.upper

    def test_all_filtered_errors(self):
        pts = self._point_set([3, 4])
        with pytest.raises(AllSegmentsFilteredError):
            filter_segments(pts, EdgeDetectParams(min_segment_length=20))

    def test_output_points_subset_of_input(self):
        pts = self._point_set([25, 7, 31])
        out = filter_segments(pts, EdgeDetectParams(min_segment_length=20))
        in_pts = {(x, y) for s in pts.upper for x, y in zip(s.xs, s.ys)}
        out_pts = {(x, y) for s in out.upper for x, y in zip(s.xs, s.ys)}
        assert out_pts <= in_pts
        assert all(len(s) >= 20 for s in out.upper)


class TestParams:
    def test_min_segment_length_validated(self):
        with pytest.raises(ValueError):
            EdgeDetectParams(min_segment_length=1)

    def test_gap_tolerance_validated(self):
        with pytest.raises(ValueError):
            EdgeDetectParams(gap_tolerance=0)

    def test_csv_dump(self):
        pts = extract_boundary_points(_band_mask(width=10), EdgeDetectParams())
        csv = pts.to_csv()
        lines = csv.strip().splitlines()
        assert lines[0] == "x,y,boundary,segment_id"
        assert any(",upper," in l for l in lines[1:])
        assert any(",lower," in l for l in lines[1:])
