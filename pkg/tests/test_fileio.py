import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rmaa._validation import FOV_TYPES, OddResolutionError, ValidationError
from rmaa.compositor import Framebuffer
from rmaa.fileio import (
    LAYERS,
    FilenameError,
    MapFileDescriptor,
    MapFileError,
    decode_gamma,
    default_map_name,
    encode_gamma,
    format_map_filename,
    parse_map_filename,
    read_image,
    read_map,
    read_map_layers,
    write_image,
    write_map,
    write_map_layers,
)
from rmaa.maps import STMap, UniversalParams, universal_perspective_map, universal_stmap

pytest.importorskip("OpenEXR")


class TestMapRoundTrip:
    @pytest.mark.parametrize("ext", ["exr", "rmap"])
    def test_identity_bit_exact(self, tmp_path, ext):
        m = STMap.identity(64, 64)
        path = tmp_path / f"id_St.{ext}"
        write_map(m, path)
        back = read_map(path)
        np.testing.assert_array_equal(back.texels, m.texels.astype(np.float32))
        np.testing.assert_array_equal(back.mask, m.mask)
        assert back.kind == "distort"

    @pytest.mark.parametrize("ext", ["exr", "rmap"])
    def test_perspective_map_with_vignette(self, tmp_path, ext):
        pm = universal_perspective_map(UniversalParams.from_degrees(270, "h", 0, 0.75, 0.98), 32, 16)
        path = tmp_path / f"fish_PmV.{ext}"
        write_map(pm, path)
        back = read_map(path)
        np.testing.assert_array_equal(back.texels, pm.texels.astype(np.float32))
        # 8-bit vignette is within half a level
        assert np.abs(back.vignette - pm.vignette).max() <= 0.5 / 255 + 1e-12
        assert back.metadata["k"] == pm.metadata["k"]

    def test_random_float_layer_bit_exact(self, tmp_path):
        data = np.random.default_rng(0).normal(size=(6, 10, 3)).astype(np.float32)
        write_map_layers(tmp_path / "r_Pm.exr", {"Pm": data})
        layers, _ = read_map_layers(tmp_path / "r_Pm.exr")
        np.testing.assert_array_equal(layers["Pm"], data)

    def test_st_layer_two_channels(self, tmp_path):
        import OpenEXR

        path = tmp_path / "id_St.exr"
        write_map_layers(path, {"St": STMap.identity(8, 8).texels})
        names = sorted(OpenEXR.File(str(path), separate_channels=True).channels())
        assert names == ["St.G", "St.R"]

    def test_bottom_up_storage(self, tmp_path):
        import OpenEXR

        path = tmp_path / "id_St.exr"
        write_map_layers(path, {"St": STMap.identity(8, 8).texels})
        t = OpenEXR.File(str(path), separate_channels=True).channels()["St.G"].pixels
        assert t[0, 0] > t[-1, 0]  # first stored row is the top of the frame

    def test_odd_rejected(self, tmp_path):
        with pytest.raises(OddResolutionError, match="even"):
            write_map_layers(tmp_path / "x_St.exr", {"St": np.zeros((64, 63, 2))})

    def test_wrong_channel_count(self, tmp_path):
        with pytest.raises(ValidationError):
            write_map_layers(tmp_path / "x_St.exr", {"St": np.zeros((4, 4, 3))})

    def test_unknown_symbol(self, tmp_path):
        with pytest.raises(ValidationError):
            write_map_layers(tmp_path / "x_Q.exr", {"Q": np.zeros((4, 4))})

    def test_missing_file(self, tmp_path):
        with pytest.raises(MapFileError):
            read_map(tmp_path / "nope_St.exr")

    def test_garbage_file(self, tmp_path):
        p = tmp_path / "bad_St.exr"
        p.write_bytes(b"not an image")
        with pytest.raises(MapFileError):
            read_map(p)

    def test_truncated_raw(self, tmp_path):
        p = tmp_path / "id_St.rmap"
        write_map(STMap.identity(8, 8), p)
        p.write_bytes(p.read_bytes()[:-10])
        with pytest.raises(MapFileError):
            read_map(p)

    def test_metadata_carried(self, tmp_path):
        m = universal_stmap(UniversalParams.from_degrees(100, "d", 0.5, 0.8, 0.9), 16, 16)
        write_map(m, tmp_path / "m_St.exr")
        back = read_map(tmp_path / "m_St.exr")
        for key in ("fov_type", "fov_deg", "k", "l", "s"):
            assert back.metadata[key] == m.metadata[key]


class TestFilenames:
    def test_single_layer(self):
        assert format_map_filename(MapFileDescriptor("iDome", ("PmV",))) == "iDome_PmV.exr"

    def test_full(self):
        d = MapFileDescriptor("AnamorphicWide", ("Pm", "St", "P", "V"), "d", 140, 0, 0.62, 0.98)
        assert format_map_filename(d) == "AnamorphicWide_(Pm_St_P_V)_(d140_k0_l0.62_s0.98).exr"

    def test_parse_examples(self):
        d = parse_map_filename("AnamorphicWide_(Pm_St_P_V)_(d140_k0_l0.62_s0.98).exr")
        assert d.layers == ("Pm", "St", "P", "V") and d.fov_type == "d" and d.fov_deg == 140
        assert (d.k, d.l, d.s) == (0, 0.62, 0.98)
        assert parse_map_filename("/some/dir/iDome_PmV.exr") == MapFileDescriptor("iDome", ("PmV",))

    def test_channel_count(self):
        assert MapFileDescriptor("a", ("Pm", "St", "P", "V")).channels == 7

    @pytest.mark.parametrize(
        "name",
        ["iDome_Xy.exr", "iDome.exr", "iDome_PmV.png", "_PmV.exr", "a_(Pm_St.exr", "a_(Pm)_(q1).exr", "a_(Pm)_(h90_h90).exr"],
    )
    def test_parse_errors(self, name):
        with pytest.raises(FilenameError) as err:
            parse_map_filename(name)
        assert 0 <= err.value.position <= len(name)

    def test_error_position_points_at_symbol(self):
        with pytest.raises(FilenameError) as err:
            parse_map_filename("cam_(Pm_Zz)_(h90).exr")
        assert err.value.position == 8

    def test_descriptor_validation(self):
        with pytest.raises(ValidationError):
            MapFileDescriptor("a", ("Nope",))
        with pytest.raises(ValidationError):
            MapFileDescriptor("a", ())
        with pytest.raises(ValidationError):
            MapFileDescriptor("a b", ("St",))

    def test_default_name(self):
        m = universal_stmap(UniversalParams.from_degrees(90), 8, 8)
        assert default_map_name(m, "Universal") == "Universal_(St_M)_(h90_k1_l1_s0.98).exr"

    @settings(max_examples=100)
    @given(
        st.from_regex(r"[A-Za-z0-9][A-Za-z0-9_-]{0,12}", fullmatch=True),
        st.lists(st.sampled_from(sorted(LAYERS)), min_size=1, max_size=4),
        st.one_of(st.none(), st.tuples(st.sampled_from(FOV_TYPES), st.floats(1, 360, allow_nan=False))),
        st.one_of(st.none(), st.floats(-1, 1)),
        st.one_of(st.none(), st.floats(0, 1)),
        st.one_of(st.none(), st.floats(0.8, 1)),
        st.sampled_from(["exr", "rmap"]),
    )
    def test_parse_inverts_format(self, desc, layers, fov, k, l, s, ext):
        fov_type, deg = fov if fov else (None, None)
        d = MapFileDescriptor(desc, tuple(layers), fov_type, deg, k, l, s, ext)
        assert parse_map_filename(format_map_filename(d)) == d


class TestGamma:
    def test_half(self):
        assert encode_gamma(0.5) == 186

    def test_endpoints(self):
        np.testing.assert_array_equal(encode_gamma([0.0, 1.0]), [0, 255])

    def test_linear_passthrough(self):
        x = np.linspace(0, 1, 256)
        np.testing.assert_array_equal(encode_gamma(x, 1.0), np.round(255 * x))

    @given(st.lists(st.floats(0, 1), min_size=2, max_size=50))
    def test_monotone(self, xs):
        xs = np.sort(xs)
        assert np.all(np.diff(encode_gamma(xs).astype(int)) >= 0)

    def test_decode_inverts(self):
        levels = np.arange(256)
        np.testing.assert_array_equal(encode_gamma(decode_gamma(levels)), levels)

    def test_bad_gamma(self):
        with pytest.raises(ValidationError):
            encode_gamma(0.5, 0.0)


class TestImage:
    def test_write_read(self, tmp_path):
        fb = Framebuffer(4, 2)
        fb.data[0, 0] = [0.25, 0.0, 0.5, 0.5]  # premultiplied by coverage 0.5
        fb.coverage[0, 0] = 0.5
        fb.fill_background([0.0, 0.0, 0.0, 1.0])
        write_image(fb, tmp_path / "img.png")
        img = read_image(tmp_path / "img.png")
        assert img.shape == (2, 4, 4)
        np.testing.assert_allclose(img[..., 3], 1.0)
        np.testing.assert_allclose(img[0, 0, :3], fb.resolved()[0, 0, :3], atol=0.01)

    def test_alpha_is_coverage(self, tmp_path):
        fb = Framebuffer(2, 2)
        fb.data[1, 1] = [0.2, 0.2, 0.2, 0.2]
        fb.coverage[1, 1] = 0.2
        write_image(fb, tmp_path / "img.png")
        img = read_image(tmp_path / "img.png")
        assert img[1, 1, 3] == pytest.approx(51 / 255)
        assert img[1, 1, 0] == pytest.approx(1.0)  # un-premultiplied

    def test_unwritable(self, tmp_path):
        with pytest.raises(MapFileError):
            write_image(Framebuffer(2, 2), tmp_path / "missing" / "img.png")
