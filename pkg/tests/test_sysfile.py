import pytest
from hypothesis import given, strategies as st

from birkhoff.coeffs import GaussQ
from birkhoff.corpus import shear_system
from birkhoff.errors import ParseError, ValidationError
from birkhoff.resonance import FrequencyModel
from birkhoff.series import TruncatedSeries
from birkhoff.sysfile import SystemSpec, emit_system, format_exact, parse_system

MINIMAL = """\
# H = x1 y1 + x1^3
dof 1
order 10
freqbasis 1
freq 1 1,0
term 1 : 1 1
term 1 : 3 0
"""


def test_minimal_file():
    spec = parse_system(MINIMAL)
    assert spec.n == 1 and spec.order == 10 and spec.exact
    assert spec.H.terms == {(1, 1): GaussQ(1), (3, 0): GaussQ(1)}
    assert spec.freq.exact_gamma() == (GaussQ(1),)


def test_duplicate_terms_are_summed_and_reduced():
    spec = parse_system(MINIMAL + "term 2/4,-3/6 : 3 0\nterm -1/2,1/2 : 3 0\n")
    assert spec.H.terms[(3, 0)] == GaussQ(1)
    spec = parse_system(MINIMAL + "term -1 : 3 0\n")
    assert (3, 0) not in spec.H.terms


def test_frequency_mismatch_is_rejected():
    with pytest.raises(ValidationError):
        parse_system(MINIMAL.replace("freq 1 1,0", "freq 1 2,0"))


def test_missing_frequency_model_is_derived():
    spec = parse_system("dof 2\nterm 1 : 1 0 1 0\nterm -1 : 0 1 0 1\n")
    assert spec.freq.exact_gamma() == (GaussQ(1), GaussQ(-1))
    assert spec.order == 3


@pytest.mark.parametrize("text, line, col", [
    ("dof 1\nterm 1 : 1 1 0\n", 2, 10),
    ("dof 1\nterm 1 1 1\n", 2, 6),
    ("dof 1\nfrob 3\n", 2, 1),
    ("dof x\n", 1, 5),
    ("dof 1\nterm 1/0 : 1 1\n", 2, 6),
    ("dof 1\n  term 1 : -1 3\n", 2, 12),
    ("term 1 : 1 1\n", 1, 1),
])
def test_parse_errors_carry_position(text, line, col):
    with pytest.raises(ParseError) as info:
        parse_system(text)
    assert (info.value.line, info.value.column) == (line, col)
    assert str(info.value).startswith(f"line {line}, col {col}: ")


def test_integrals_and_generators():
    text = MINIMAL + "integral 2\nterm 1 : 1 1\n"
    with pytest.raises(ValidationError):
        parse_system(text)
    spec = parse_system(MINIMAL + "generator 5\nterm 1/3 : 3 0\n")
    gens = spec.generator_list()
    assert len(gens) == 3 and gens[0].is_zero() and gens[1].is_zero()
    assert gens[2].terms == {(3, 0): GaussQ(1, 0) / 3}
    with pytest.raises(ValidationError):
        parse_system("dof 2\nterm 1 : 1 0 1 0\nterm 2 : 0 1 0 1\n").momentum_functions()


def test_decimal_literals_make_a_float_file():
    spec = parse_system("dof 1\nfreqbasis 1\nfreq 1 3/2,0\nterm 1.5 : 1 1\nterm 0.25,-1e-3 : 2 1\n")
    assert not spec.exact
    assert spec.H.terms[(2, 1)] == complex(0.25, -1e-3)
    assert parse_system(emit_system(spec)).H == spec.H


def test_numeric_frequency_model():
    text = ("dof 2\nfreqbasis 2\nfreq 1 1,0 0,0\nfreq 2 0,0 1,0\n"
            "numericfreq 1 1.0 0.0\nnumericfreq 2 1.4142135623730951 0.0\n"
            "term 1 : 1 0 1 0\nterm 1.4142135623730951 : 0 1 0 1\n")
    spec = parse_system(text)
    assert spec.freq.d == 2 and spec.declared_numeric
    assert emit_system(spec) == (
        "dof 2\norder 3\nfreqbasis 2\nfreq 1 1,0 0,0\nfreq 2 0,0 1,0\n"
        "numericfreq 1 1.0 0.0\nnumericfreq 2 1.4142135623730951 0.0\nhamiltonian\n"
        "term 1.0,0.0 : 1 0 1 0\nterm 1.4142135623730951,0.0 : 0 1 0 1\n")
    with pytest.raises(ValidationError):
        parse_system(text.replace("1.4142135623730951 0.0", "1.5 0.0"))
    with pytest.raises(ValidationError):
        parse_system(text.replace("numericfreq 2 1.4142135623730951 0.0\n", ""))


def test_corpus_round_trip_is_byte_identical():
    spec, _, _ = shear_system()
    text = emit_system(spec, comments=["corpus"])
    again = parse_system(text)
    assert again.H == spec.H and again.integrals == spec.integrals
    assert emit_system(again, comments=["corpus"]) == text


coef = st.builds(GaussQ, st.fractions(max_denominator=50, min_value=-9, max_value=9),
                 st.fractions(max_denominator=50, min_value=-9, max_value=9))


@given(st.dictionaries(st.tuples(*[st.integers(0, 3)] * 4).filter(lambda m: sum(m) >= 3), coef, max_size=12),
       st.sampled_from([(1, 2), (1, -1), (3, 5)]))
def test_round_trip_property(extra, gamma):
    terms = {(1, 0, 1, 0): GaussQ(gamma[0]), (0, 1, 0, 1): GaussQ(gamma[1])}
    terms.update(extra)
    H = TruncatedSeries(2, 12, terms)
    spec = SystemSpec(2, 12, H, FrequencyModel.rational([GaussQ(g) for g in gamma]),
                      integrals={2: TruncatedSeries.action(2, (0, 1), 12)})
    text = emit_system(spec)
    back = parse_system(text)
    assert back.H == spec.H.with_order(back.H.order)
    assert emit_system(back) == text


def test_format_exact():
    assert format_exact(GaussQ(1, 0) / 3) == "1/3"
    assert format_exact(GaussQ(0, -2)) == "-2i"
    assert format_exact(GaussQ(1, -2) / 2) == "1/2-1i"
