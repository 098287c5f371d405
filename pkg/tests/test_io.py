import numpy as np
import pytest

from evmeshflow import (
    EventStream,
    FormatError,
    ShapeError,
    flow_to_color,
    read_evt1,
    read_flo1,
    read_msh1,
    read_pgm,
    read_vox1,
    seeded_rng,
    write_events_csv,
    write_csv_rows,
    write_evt1,
    write_flo1,
    write_msh1,
    write_pgm,
    write_ppm,
    write_vox1,
)


def _stream(n=20, width=32, height=24, seed=0):
    rng = seeded_rng(seed)
    t = np.sort(rng.integers(0, 100_000, size=n))
    return EventStream(
        rng.integers(0, width, size=n),
        rng.integers(0, height, size=n),
        t,
        rng.choice([-1, 1], size=n),
        width,
        height,
        int(t.min()),
        int(t.max()),
    )


class TestEvt1:
    def test_roundtrip(self, tmp_path):
        stream = _stream()
        path = tmp_path / "events.evt1"
        write_evt1(path, stream)
        back = read_evt1(path)
        assert back.width == stream.width and back.height == stream.height
        assert np.array_equal(back.x, stream.x)
        assert np.array_equal(back.y, stream.y)
        assert np.array_equal(back.t, stream.t)
        assert np.array_equal(back.p, stream.p)

    def test_empty_stream_roundtrip(self, tmp_path):
        empty = np.empty(0, dtype=np.int64)
        stream = EventStream(empty, empty, empty, empty, 8, 8, 0, 10)
        path = tmp_path / "empty.evt1"
        write_evt1(path, stream)
        back = read_evt1(path)
        assert len(back) == 0
        assert back.width == 8

    def test_record_layout(self, tmp_path):
        stream = EventStream([3], [5], [7], [-1], 16, 16, 0, 10)
        path = tmp_path / "one.evt1"
        write_evt1(path, stream)
        blob = path.read_bytes()
        assert blob[:4] == b"EVT1"
        assert len(blob) == 16 + 16

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.evt1"
        write_evt1(path, _stream(4))
        blob = bytearray(path.read_bytes())
        blob[:4] = b"NOPE"
        path.write_bytes(bytes(blob))
        with pytest.raises(FormatError):
            read_evt1(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "short.evt1"
        write_evt1(path, _stream(4))
        blob = path.read_bytes()
        path.write_bytes(blob[:-5])
        with pytest.raises(FormatError):
            read_evt1(path)

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "tiny.evt1"
        path.write_bytes(b"EVT")
        with pytest.raises(FormatError):
            read_evt1(path)


class TestVox1:
    def test_roundtrip(self, tmp_path):
        grid = seeded_rng(1).normal(size=(5, 6, 7)).astype(np.float32)
        path = tmp_path / "grid.vox1"
        write_vox1(path, grid)
        back = read_vox1(path)
        assert back.shape == (5, 6, 7)
        assert np.allclose(back, grid, atol=1e-7)

    def test_shape_validation(self, tmp_path):
        with pytest.raises(ShapeError):
            write_vox1(tmp_path / "x.vox1", np.zeros((4, 4)))

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.vox1"
        write_vox1(path, np.zeros((1, 2, 2)))
        blob = bytearray(path.read_bytes())
        blob[:4] = b"XXXX"
        path.write_bytes(bytes(blob))
        with pytest.raises(FormatError):
            read_vox1(path)

    def test_size_mismatch(self, tmp_path):
        path = tmp_path / "short.vox1"
        write_vox1(path, np.zeros((2, 3, 3)))
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(FormatError):
            read_vox1(path)


class TestFlo1:
    def test_roundtrip(self, tmp_path):
        flow = seeded_rng(2).normal(size=(5, 9, 2))
        path = tmp_path / "flow.flo1"
        write_flo1(path, flow)
        back = read_flo1(path)
        assert back.shape == (5, 9, 2)
        assert np.allclose(back, flow, atol=1e-6)

    def test_header_stores_width_then_height(self, tmp_path):
        path = tmp_path / "flow.flo1"
        write_flo1(path, np.zeros((3, 7, 2)))
        blob = path.read_bytes()
        assert blob[:4] == b"FLO1"
        width, height = np.frombuffer(blob[4:12], dtype="<u4")
        assert (width, height) == (7, 3)

    def test_shape_validation(self, tmp_path):
        with pytest.raises(ShapeError):
            write_flo1(tmp_path / "x.flo1", np.zeros((4, 4, 3)))

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.flo1"
        write_flo1(path, np.zeros((2, 2, 2)))
        blob = bytearray(path.read_bytes())
        blob[0] = 0
        path.write_bytes(bytes(blob))
        with pytest.raises(FormatError):
            read_flo1(path)


class TestMsh1:
    def test_roundtrip(self, tmp_path):
        mesh = seeded_rng(3).normal(size=(17, 17, 2))
        path = tmp_path / "mesh.msh1"
        write_msh1(path, mesh)
        back = read_msh1(path)
        assert back.shape == (17, 17, 2)
        assert np.allclose(back, mesh, atol=1e-6)

    def test_header_stores_cell_counts(self, tmp_path):
        path = tmp_path / "mesh.msh1"
        write_msh1(path, np.zeros((5, 9, 2)))
        blob = path.read_bytes()
        cells_x, cells_y = np.frombuffer(blob[4:12], dtype="<u4")
        assert (cells_x, cells_y) == (8, 4)

    def test_degenerate_mesh_rejected(self, tmp_path):
        with pytest.raises(ShapeError):
            write_msh1(tmp_path / "x.msh1", np.zeros((1, 5, 2)))

    def test_payload_mismatch(self, tmp_path):
        path = tmp_path / "short.msh1"
        write_msh1(path, np.zeros((3, 3, 2)))
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(FormatError):
            read_msh1(path)


class TestPgm:
    def test_roundtrip_quantized(self, tmp_path):
        image = seeded_rng(4).uniform(0, 1, size=(6, 8))
        path = tmp_path / "img.pgm"
        write_pgm(path, image)
        back = read_pgm(path)
        assert back.shape == (6, 8)
        assert np.allclose(back, image, atol=1.0 / 65535.0)

    def test_clipping(self, tmp_path):
        path = tmp_path / "clip.pgm"
        write_pgm(path, np.array([[-1.0, 2.0]]))
        back = read_pgm(path)
        assert back[0, 0] == 0.0
        assert back[0, 1] == 1.0

    def test_not_pgm(self, tmp_path):
        path = tmp_path / "x.pgm"
        path.write_bytes(b"P3\n1 1\n255\n0")
        with pytest.raises(FormatError):
            read_pgm(path)

    def test_payload_mismatch(self, tmp_path):
        path = tmp_path / "short.pgm"
        write_pgm(path, np.zeros((4, 4)))
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(FormatError):
            read_pgm(path)


class TestPpmAndColor:
    def test_ppm_bytes(self, tmp_path):
        rgb = np.zeros((2, 2, 3), dtype=np.uint8)
        rgb[0, 0] = (255, 0, 0)
        path = tmp_path / "img.ppm"
        write_ppm(path, rgb)
        blob = path.read_bytes()
        assert blob.startswith(b"P6\n2 2\n255\n")
        assert blob[-12:] == rgb.tobytes()[-12:]

    def test_ppm_shape_validation(self, tmp_path):
        with pytest.raises(ShapeError):
            write_ppm(tmp_path / "x.ppm", np.zeros((2, 2)))

    def test_zero_flow_is_white(self):
        rgb = flow_to_color(np.zeros((4, 4, 2)))
        assert rgb.dtype == np.uint8
        assert np.all(rgb == 255)

    def test_magnitude_saturates_colors(self):
        flow = np.zeros((1, 2, 2))
        flow[0, 0] = (1.0, 0.0)
        flow[0, 1] = (10.0, 0.0)
        rgb = flow_to_color(flow)
        # Equal direction: the larger magnitude is farther from white.
        assert rgb[0, 1].astype(int).sum() < rgb[0, 0].astype(int).sum()

    def test_distinct_directions_get_distinct_hues(self):
        flow = np.zeros((1, 4, 2))
        flow[0, 0] = (5.0, 0.0)
        flow[0, 1] = (-5.0, 0.0)
        flow[0, 2] = (0.0, 5.0)
        flow[0, 3] = (0.0, -5.0)
        rgb = flow_to_color(flow)
        colors = {tuple(c) for c in rgb[0]}
        assert len(colors) == 4

    def test_explicit_max_mag_normalization(self):
        flow = np.full((2, 2, 2), 3.0)
        a = flow_to_color(flow)
        b = flow_to_color(flow, max_mag=float(np.hypot(3, 3)))
        assert np.array_equal(a, b)


class TestCsv:
    def test_events_csv(self, tmp_path):
        stream = EventStream([1, 2], [3, 4], [10, 20], [1, -1], 8, 8, 0, 30)
        path = tmp_path / "events.csv"
        write_events_csv(path, stream)
        assert path.read_text() == "x,y,t,p\n1,3,10,1\n2,4,20,-1\n"

    def test_generic_rows(self, tmp_path):
        path = tmp_path / "table.csv"
        write_csv_rows(path, ["a", "b"], [[1, 2], ["x", 0.5]])
        assert path.read_text() == "a,b\n1,2\nx,0.5\n"
