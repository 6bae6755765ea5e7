import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bloch_rephase.errors import SequenceSemanticError, SequenceSyntaxError
from bloch_rephase.pulses import LorentzianEnvelope, chirped_arp, half_passage
from bloch_rephase.seqfile import load_sequence, parse_sequence_file, shipped_example
from bloch_rephase.sequence import Delay
from bloch_rephase.units import khz, mhz


def test_minimal_file():
    seq = parse_sequence_file(b"delay 5 us\n")
    assert seq.elements == (Delay(5.0),)


def test_comments_and_blank_lines():
    seq = parse_sequence_file("# header\n\n  delay 1.5 us   # trailing\n")
    assert seq.elements == (Delay(1.5),)


def test_negative_delay_reports_element_index():
    with pytest.raises(SequenceSemanticError) as exc:
        parse_sequence_file("delay 1 us\ndelay -1 us\n")
    assert exc.value.index == 1 and exc.value.line == 2


def test_chirp_units_are_converted():
    seq = parse_sequence_file("pulse chirp center=14 span=4 duration=100 rabi=141 phase_offset=0.25\n")
    (p,) = seq.elements
    assert p == chirped_arp(mhz(14), khz(141), mhz(4), 100.0, phase_offset=0.25)


def test_lorentzian_envelope():
    seq = parse_sequence_file("pulse chirp center=14 span=4 duration=100 rabi=141 envelope=lorentzian:0.6\n")
    env = seq.elements[0].envelope
    assert isinstance(env, LorentzianEnvelope)
    assert env.bandwidth == pytest.approx(mhz(0.6)) and env.peak == pytest.approx(khz(141))


def test_half_passages():
    text = (
        "pulse half_passage direction=up center=14 span=4 duration=100 rabi=141\n"
        "pulse half_passage direction=down center=14 span=4 duration=100 rabi=141\n"
    )
    up, down = parse_sequence_file(text).elements
    assert up == half_passage("up", mhz(14), khz(141), mhz(4), 100.0)
    assert down == half_passage("down", mhz(14), khz(141), mhz(4), 100.0)
    assert up.duration == 50.0


def test_square_and_reference():
    seq = parse_sequence_file("reference 10\npulse square center=10 duration=2.5 rabi=100\n")
    assert seq.omega_ref == pytest.approx(mhz(10))
    assert seq.elements[0].kind == "square"


def test_start_inserts_gap_delay():
    text = "delay 5 us\npulse square center=10 duration=2 rabi=100 start=8\n"
    seq = parse_sequence_file(text)
    assert [type(e).__name__ for e in seq.elements] == ["Delay", "Delay", "PulseSpec"]
    assert seq.elements[1].tau == pytest.approx(3.0)
    assert seq.timeline()[-1][0] == pytest.approx(8.0)


def test_start_overlap_is_semantic_error():
    text = "pulse square center=10 duration=4 rabi=100\npulse square center=10 duration=2 rabi=100 start=3\n"
    with pytest.raises(SequenceSemanticError) as exc:
        parse_sequence_file(text)
    assert exc.value.index == 1 and "overlap" in str(exc.value)


@pytest.mark.parametrize(
    "text,line,col",
    [
        ("delay 5 ms\n", 1, 9),
        ("delay five us\n", 1, 7),
        ("\n\npulse wiggle center=1\n", 3, 7),
        ("pulse chirp center=14 span=4 duration=100\n", 1, 7),
        ("pulse chirp center=14 span=4 duration=100 rabi=1 bogus=3\n", 1, 50),
        ("pulse chirp center=14 span=4 duration=100 rabi=1 envelope=gauss\n", 1, 59),
        ("pulse half_passage direction=sideways center=1 span=1 duration=1 rabi=1\n", 1, 30),
        ("  hello\n", 1, 3),
        ("delay 1 us\nreference 1\nreference 2\n", 3, 1),
        ("pulse chirp center=14 center=14 span=4 duration=100 rabi=1\n", 1, 23),
    ],
)
def test_syntax_errors_have_position(text, line, col):
    with pytest.raises(SequenceSyntaxError) as exc:
        parse_sequence_file(text)
    assert (exc.value.line, exc.value.column) == (line, col)


def test_invalid_utf8_position():
    with pytest.raises(SequenceSyntaxError) as exc:
        parse_sequence_file(b"delay 1 us\ndelay \xff us\n")
    assert (exc.value.line, exc.value.column) == (2, 7)


@pytest.mark.parametrize(
    "text",
    [
        "pulse chirp center=14 span=4 duration=0 rabi=1\n",
        "pulse chirp center=14 span=4 duration=10 rabi=-1\n",
        "pulse chirp center=-1 span=4 duration=10 rabi=1\n",
        "pulse chirp center=14 span=4 duration=10 rabi=1 envelope=lorentzian:0\n",
        "reference -3\n",
    ],
)
def test_semantic_value_errors(text):
    with pytest.raises(SequenceSemanticError):
        parse_sequence_file(text)


def test_shipped_example_is_canonical():
    seq = load_sequence(shipped_example())
    shape = seq.canonical()
    assert (shape.tau1, shape.tau2, shape.tau3) == (10.0, 20.0, 10.0)
    assert shape.pulse_a == shape.pulse_b
    assert shape.pulse_a.T == 100.0
    assert shape.pulse_a.mean_chirp_rate == pytest.approx(2 * math.pi * 0.04)
    assert seq.omega_ref == pytest.approx(mhz(14.0))


@given(st.lists(st.floats(0, 1e3, allow_nan=False), min_size=1, max_size=8))
def test_delay_roundtrip(values):
    text = "".join(f"delay {v!r} us\n" for v in values)
    seq = parse_sequence_file(text)
    assert [e.tau for e in seq.elements] == values
