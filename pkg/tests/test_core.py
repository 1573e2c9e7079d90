import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcxai import (
    CategoryMetadata,
    Mechanism,
    PointCloud,
    SaliencyMap,
    SegmentLabeling,
    read_labels,
    read_points,
    write_colored_ply,
    write_points,
    write_saliency_csv,
)
from pcxai.core import ParseError


class TestPointCloud:
    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            PointCloud(np.empty((0, 3)))

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            PointCloud(np.array([[0.0, np.nan, 0.0]]))

    def test_immutable(self):
        cloud = PointCloud(np.zeros((2, 3)))
        with pytest.raises(ValueError):
            cloud.points[0, 0] = 1.0


class TestSegmentLabeling:
    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            SegmentLabeling(np.array([0, -1]))

    def test_name_fallback(self):
        lab = SegmentLabeling(np.array([0, 3]), names={0: "seat"})
        assert lab.name_of(0) == "seat"
        assert lab.name_of(3) == "segment_3"


def test_category_metadata_part_count_bounds():
    CategoryMetadata("airplane", 0, 4)
    with pytest.raises(ValueError):
        CategoryMetadata("rod", 1, 1)
    with pytest.raises(ValueError):
        CategoryMetadata("octopus", 2, 7)


class TestReadPoints:
    def test_basic(self, tmp_path):
        p = tmp_path / "a.pts"
        p.write_text("0 0 0\n1 2 3")
        cloud = read_points(p)
        assert np.array_equal(cloud.points, [[0, 0, 0], [1, 2, 3]])

    def test_parse_error_names_line(self, tmp_path):
        p = tmp_path / "a.pts"
        p.write_text("a b c\n")
        with pytest.raises(ParseError, match=":1"):
            read_points(p)

    def test_extra_columns_ignored(self, tmp_path):
        p = tmp_path / "a.pts"
        p.write_text("0 0 0 7\n")
        cloud = read_points(p)
        assert np.array_equal(cloud.points, [[0, 0, 0]])

    def test_empty_file(self, tmp_path):
        p = tmp_path / "a.pts"
        p.write_text("\n\n")
        with pytest.raises(ParseError):
            read_points(p)


class TestReadLabels:
    def _cloud(self, n):
        return PointCloud(np.zeros((n, 3)))

    def test_basic(self, tmp_path):
        p = tmp_path / "a.seg"
        p.write_text("0\n0\n1")
        lab = read_labels(p, self._cloud(3))
        assert np.array_equal(lab.labels, [0, 0, 1])

    def test_length_mismatch(self, tmp_path):
        p = tmp_path / "a.seg"
        p.write_text("0\n1")
        with pytest.raises(ParseError, match="2 labels"):
            read_labels(p, self._cloud(3))

    def test_negative_label(self, tmp_path):
        p = tmp_path / "a.seg"
        p.write_text("-1\n0\n0")
        with pytest.raises(ParseError, match="negative"):
            read_labels(p, self._cloud(3))


@given(
    st.lists(
        st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
        min_size=3,
        max_size=60,
    ).filter(lambda v: len(v) % 3 == 0)
)
@settings(max_examples=50)
def test_points_round_trip_exact(tmp_path_factory, values):
    pts = np.array(values).reshape(-1, 3)
    cloud = PointCloud(pts)
    path = tmp_path_factory.mktemp("rt") / "a.pts"
    write_points(cloud, path)
    back = read_points(path)
    assert np.array_equal(back.points, cloud.points)


def _map_for(labels, per_segment, mechanism=Mechanism.ABSENCE):
    return SaliencyMap(
        mechanism=mechanism,
        per_segment=per_segment,
        target_class=0,
        labels=np.asarray(labels, dtype=np.int64),
    )


class TestSaliencyMapPerPoint:
    def test_derived_field(self):
        m = _map_for([0, 1, 1, 0], {0: 0.25, 1: 0.5})
        assert np.array_equal(m.per_point(), [0.25, 0.5, 0.5, 0.25])

    @given(st.integers(1, 50), st.integers(1, 6), st.integers(0, 2**32 - 1))
    @settings(max_examples=100)
    def test_pure_function_of_labels_and_map(self, n, k, seed):
        rng = np.random.default_rng(seed)
        labels = rng.integers(0, k, n)
        per_segment = {int(s): float(rng.uniform()) for s in np.unique(labels)}
        m = _map_for(labels, per_segment)
        per_point = m.per_point()
        for i in range(n):
            assert per_point[i] == per_segment[int(labels[i])]


class TestColoredPly:
    def _read_body(self, path):
        lines = path.read_text().splitlines()
        split = lines.index("end_header")
        return lines[: split + 1], lines[split + 1 :]

    def test_endpoint_colors(self, tmp_path):
        cloud = PointCloud(np.array([[0, 0, 0], [1, 1, 1]], float))
        m = _map_for([0, 1], {0: 0.0, 1: 1.0})
        path = tmp_path / "a.ply"
        write_colored_ply(cloud, m, path)
        header, body = self._read_body(path)
        assert header[0] == "ply" and header[1] == "format ascii 1.0"
        assert "element vertex 2" in header
        assert body[0].split()[3:] == ["0", "0", "255"]
        assert body[1].split()[3:] == ["255", "0", "0"]

    def test_all_equal_is_gray(self, tmp_path):
        cloud = PointCloud(np.zeros((3, 3)))
        m = _map_for([0, 0, 0], {0: 0.7})
        path = tmp_path / "a.ply"
        write_colored_ply(cloud, m, path)
        _, body = self._read_body(path)
        for line in body:
            assert line.split()[3:] == ["128", "128", "128"]

    def test_midpoint_color(self, tmp_path):
        cloud = PointCloud(np.zeros((3, 3)))
        m = _map_for([0, 1, 2], {0: 0.0, 1: 0.5, 2: 1.0})
        path = tmp_path / "a.ply"
        write_colored_ply(cloud, m, path)
        _, body = self._read_body(path)
        assert body[1].split()[3:] == ["127", "0", "127"]

    def test_vertex_count_matches(self, tmp_path, rng):
        n = 17
        cloud = PointCloud(rng.uniform(-1, 1, (n, 3)))
        m = _map_for(rng.integers(0, 3, n), {0: 0.1, 1: 0.2, 2: 0.3})
        path = tmp_path / "a.ply"
        write_colored_ply(cloud, m, path)
        header, body = self._read_body(path)
        assert f"element vertex {n}" in header
        assert len(body) == n


class TestSaliencyCsv:
    def test_rows_sorted_by_id(self, tmp_path):
        lab = SegmentLabeling(np.array([1, 0]))
        m = _map_for([1, 0], {1: 0.1, 0: 0.3})
        path = tmp_path / "s.csv"
        write_saliency_csv(m, lab, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "segment_id,part_name,mechanism,attribution"
        assert lines[1] == "0,segment_0,absence,0.3"
        assert lines[2] == "1,segment_1,absence,0.1"

    def test_presence_row(self, tmp_path):
        lab = SegmentLabeling(np.array([2, 2]))
        m = _map_for([2, 2], {2: -0.7}, Mechanism.PRESENCE)
        path = tmp_path / "s.csv"
        write_saliency_csv(m, lab, path)
        assert path.read_text().splitlines()[1] == "2,segment_2,presence,-0.7"

    def test_unknown_segment_id(self, tmp_path):
        lab = SegmentLabeling(np.array([0]))
        m = _map_for([0], {5: 0.1})
        with pytest.raises(ValueError, match="5"):
            write_saliency_csv(m, lab, tmp_path / "s.csv")
