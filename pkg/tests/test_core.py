import numpy as np
import pytest
from hypothesis import given, strategies as st

from filtersim.core import (
    BorderPolicy,
    ConfigError,
    FilterConfig,
    FixedFormat,
    Form,
    IssueCode,
    Kernel,
    Layout,
    PixelImage,
    Q1_14,
    check_config,
    fixed_mul,
    pixel_format,
    product_format,
    round_saturate,
    validate_config,
)

U8 = pixel_format(8)


class TestFixedFormat:
    def test_q1_14_geometry(self):
        assert Q1_14.width == 16
        assert (Q1_14.min_raw, Q1_14.max_raw) == (-32768, 32767)
        assert Q1_14.one == 16384

    @pytest.mark.parametrize("text", ["s1.14", "u8.0", "s0.15", "u2.22"])
    def test_parse_roundtrip(self, text):
        assert str(FixedFormat.parse(text)) == text

    @pytest.mark.parametrize("text", ["q1.14", "s1", "sx.y", "", "s40.20"])
    def test_parse_rejects(self, text):
        with pytest.raises(ValueError):
            FixedFormat.parse(text)

    def test_product_of_pixel_and_coefficient_is_24_bits(self):
        assert product_format(U8, Q1_14).width == 25 - 1  # unsigned x signed: no extra bit

    def test_signed_by_signed_gets_extra_bit(self):
        p = product_format(Q1_14, Q1_14)
        assert p.contains(Q1_14.min_raw * Q1_14.min_raw)


class TestFixedMul:
    def test_zero_annihilates(self):
        assert fixed_mul(0, U8, -12345, Q1_14) == 0

    def test_identity_coefficient(self):
        assert fixed_mul(255, U8, 16384, Q1_14) == 255 * 16384

    def test_rejects_out_of_range_operand(self):
        with pytest.raises(ValueError):
            fixed_mul(256, U8, 1, Q1_14)
        with pytest.raises(ValueError):
            fixed_mul(1, U8, 40000, Q1_14)

    @given(st.integers(0, 255), st.integers(-32768, 32767))
    def test_matches_big_integer_product(self, a, b):
        p = fixed_mul(a, U8, b, Q1_14)
        assert p == a * b
        assert product_format(U8, Q1_14).contains(p)


class TestRoundSaturate:
    @pytest.mark.parametrize("acc, expect", [
        (0, 0), (8191, 0), (8192, 1), (3 << 13, 2), (-8192, 0), (-1, 0),
        (255 << 14, 255), ((255 << 14) + 8192, 255), (1 << 40, 255),
    ])
    def test_scalar(self, acc, expect):
        assert round_saturate(acc, 14, 8) == expect

    def test_array_matches_scalar(self, rng):
        acc = rng.integers(-(1 << 30), 1 << 30, size=500)
        vec = round_saturate(acc, 14, 8)
        assert vec.tolist() == [round_saturate(int(a), 14, 8) for a in acc]

    def test_zero_frac_bits(self):
        assert round_saturate(300, 0, 8) == 255


class TestImagesAndKernels:
    def test_pixel_image_is_read_only(self):
        img = PixelImage(np.zeros((2, 3), dtype=np.int64))
        with pytest.raises(ValueError):
            img.samples[0, 0] = 1
        assert (img.height, img.width) == (2, 3)

    def test_pixel_image_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            PixelImage([[256]])
        with pytest.raises(ValueError):
            PixelImage([[-1]])

    def test_kernel_must_be_odd_square(self):
        with pytest.raises(ValueError):
            Kernel(np.zeros((4, 4), dtype=np.int64))
        with pytest.raises(ValueError):
            Kernel(np.zeros((3, 5), dtype=np.int64))

    def test_kernel_range_checked(self):
        with pytest.raises(ValueError):
            Kernel(np.full((3, 3), 40000))

    def test_from_reals_rounds_half_up(self):
        k = Kernel.from_reals(np.full((1, 1), 0.5 / 16384 * 3))  # 1.5 raw
        assert k.coeffs[0, 0] == 2

    def test_identity(self):
        k = Kernel.identity(5)
        assert k.coeffs.sum() == Q1_14.one and k.coeffs[2, 2] == Q1_14.one


class TestValidate:
    @pytest.mark.parametrize("kwargs, codes", [
        (dict(form=Form.DIRECT, layout=Layout.LOG, w=7, adder_latency=1), set()),
        (dict(form=Form.DIRECT, layout=Layout.DSP, w=7), set()),
        (dict(form=Form.TRANSPOSED, border_policy=BorderPolicy("mirror-dup")),
         {IssueCode.TRANSPOSED_WITH_BORDER}),
        (dict(form=Form.TRANSPOSED, border_policy=BorderPolicy("neglect")), set()),
        (dict(layout=Layout.DSP, w=4), {IssueCode.EVEN_WINDOW}),
        (dict(layout=Layout.LOG, adder_latency=4), {IssueCode.LATENCY_MISMATCH}),
        (dict(border_policy=BorderPolicy("constant", 300)), {IssueCode.BAD_CONSTANT}),
        (dict(pixel_bits=0), {IssueCode.BAD_DEPTH}),
        (dict(w=4, layout=Layout.LOG, adder_latency=10), {IssueCode.EVEN_WINDOW, IssueCode.LATENCY_MISMATCH}),
    ])
    def test_table(self, kwargs, codes):
        cfg = FilterConfig(**kwargs)
        assert {i.code for i in check_config(cfg)} == codes
        if codes:
            with pytest.raises(ConfigError) as exc:
                validate_config(cfg)
            assert exc.value.codes == codes
        else:
            assert validate_config(cfg) is cfg

    def test_accumulator_overflow(self):
        cfg = FilterConfig(w=101, coeff_format=FixedFormat(True, 8, 15), pixel_bits=16)
        assert IssueCode.WIDTH_OVERFLOW in {i.code for i in check_config(cfg)}

    def test_default_is_reference_configuration(self):
        cfg = FilterConfig()
        assert (cfg.form, cfg.layout, cfg.w, cfg.pixel_bits) == (Form.DIRECT, Layout.LOG, 7, 8)
        assert cfg.a_l == 1 and cfg.product_width == 24

    def test_float_samples_rejected(self):
        with pytest.raises(TypeError):
            PixelImage(np.zeros((2, 2)))
