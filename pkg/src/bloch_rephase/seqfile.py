"""Line-oriented sequence description files.

Grammar (EBNF)::

    file       = { line } ;
    line       = [ statement ] [ comment ] newline ;
    comment    = "#" { any character } ;
    statement  = reference | delay | pulse ;
    reference  = "reference" number ;                  (* carrier of the rotating frame, MHz *)
    delay      = "delay" number "us" ;
    pulse      = "pulse" kind { param } ;
    kind       = "chirp" | "half_passage" | "square" ;
    param      = key "=" value ;
    key        = "center" | "span" | "duration" | "rabi" | "phase_offset"
               | "envelope" | "direction" | "start" ;
    value      = number | "constant" | "lorentzian:" number | "up" | "down" ;
    number     = [ "+" | "-" ] digits [ "." digits ] [ ( "e" | "E" ) [ "+" | "-" ] digits ] ;

Parameters and units:

    center        carrier frequency, MHz                    (all kinds, required)
    span          chirp span, MHz; the sign sets the sweep   (chirp, half_passage; required)
                  direction, positive is low -> high
    duration      pulse duration, us                        (all kinds, required)
    rabi          peak Rabi frequency Omega/2pi, kHz         (all kinds, required)
    phase_offset  constant phase added to the pulse, rad    (optional, default 0)
    envelope      constant | lorentzian:<bandwidth MHz>      (chirp, half_passage; default constant)
    direction     up | down                                 (half_passage, required)
    start         start of the pulse window, us from t = 0  (optional)

For ``half_passage`` the ``span`` and ``duration`` describe the full passage
it is cut from; ``up`` keeps the first half (far edge to resonance) and
``down`` the reversed second half (resonance back to the far edge).  The
resulting element lasts ``duration/2``.

Elements are laid end to end.  ``start`` may leave a gap, which becomes a
delay, but may not reach back into the previous element.
"""

from __future__ import annotations

import re
from pathlib import Path

from .errors import DomainError, SequenceSemanticError, SequenceSyntaxError
from .pulses import chirped_arp, half_passage, square_pulse
from .sequence import Delay, SequenceSpec
from .units import khz, mhz

_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_TOKEN = re.compile(r"\S+")

_KEYS = {
    "chirp": {"center", "span", "duration", "rabi", "phase_offset", "envelope", "start"},
    "half_passage": {"center", "span", "duration", "rabi", "phase_offset", "envelope", "direction", "start"},
    "square": {"center", "duration", "rabi", "phase_offset", "start"},
}
_REQUIRED = {
    "chirp": ("center", "span", "duration", "rabi"),
    "half_passage": ("center", "span", "duration", "rabi", "direction"),
    "square": ("center", "duration", "rabi"),
}
_START_SLACK = 1e-9


def _number(tok, line, col, what):
    if not _NUMBER.match(tok):
        raise SequenceSyntaxError(f"expected a number for {what}, got {tok!r}", line, col)
    return float(tok)


def _decode(text):
    if isinstance(text, str):
        return text
    try:
        return bytes(text).decode("utf-8")
    except UnicodeDecodeError as exc:
        head = bytes(text)[: exc.start]
        line = head.count(b"\n") + 1
        col = exc.start - (head.rfind(b"\n") + 1) + 1
        raise SequenceSyntaxError("invalid UTF-8", line, col) from None


def _tokens(raw):
    body = raw.split("#", 1)[0]
    return [(m.group(0), m.start() + 1) for m in _TOKEN.finditer(body)]


def _parse_params(kind, toks, line):
    params = {}
    cols = {}
    for tok, col in toks:
        if "=" not in tok:
            raise SequenceSyntaxError(f"expected key=value, got {tok!r}", line, col)
        key, val = tok.split("=", 1)
        if key not in _KEYS[kind]:
            raise SequenceSyntaxError(f"unknown parameter {key!r} for pulse {kind}", line, col)
        if key in params:
            raise SequenceSyntaxError(f"duplicate parameter {key!r}", line, col)
        vcol = col + len(key) + 1
        if key == "envelope":
            if val == "constant":
                params[key] = None
            elif val.startswith("lorentzian:"):
                bw = _number(val[len("lorentzian:"):], line, vcol + len("lorentzian:"), "lorentzian bandwidth")
                params[key] = bw
            else:
                raise SequenceSyntaxError(f"envelope must be constant or lorentzian:<MHz>, got {val!r}", line, vcol)
        elif key == "direction":
            if val not in ("up", "down"):
                raise SequenceSyntaxError(f"direction must be up or down, got {val!r}", line, vcol)
            params[key] = val
        else:
            params[key] = _number(val, line, vcol, key)
        cols[key] = vcol
    return params, cols


def _build_pulse(kind, p, index, line):
    try:
        if p["duration"] <= 0:
            raise DomainError("duration must be positive")
        if p["rabi"] < 0:
            raise DomainError("rabi must be non-negative")
        if p["center"] <= 0:
            raise DomainError("center must be positive")
        bw = p.get("envelope")
        if bw is not None and bw <= 0:
            raise DomainError("lorentzian bandwidth must be positive")
        args = dict(
            omega0=mhz(p["center"]),
            rabi=khz(p["rabi"]),
            phase_offset=p.get("phase_offset", 0.0),
        )
        if kind == "square":
            return square_pulse(T=p["duration"], **args)
        args.update(span=mhz(p["span"]), T=p["duration"], bandwidth=None if bw is None else mhz(bw))
        if kind == "chirp":
            return chirped_arp(**args)
        return half_passage(p["direction"], **args)
    except DomainError as exc:
        raise SequenceSemanticError(str(exc), index, line) from None


def parse_sequence_file(text):
    """Parse sequence-file text (str or UTF-8 bytes) into a :class:`SequenceSpec`."""
    src = _decode(text)
    elements = []
    reference = None
    cursor = 0.0
    index = 0
    for lineno, raw in enumerate(src.splitlines(), start=1):
        toks = _tokens(raw)
        if not toks:
            continue
        head, hcol = toks[0]
        if head == "reference":
            if len(toks) != 2:
                raise SequenceSyntaxError("usage: reference <MHz>", lineno, hcol)
            if reference is not None:
                raise SequenceSyntaxError("reference given twice", lineno, hcol)
            val = _number(toks[1][0], lineno, toks[1][1], "reference")
            if val <= 0:
                raise SequenceSemanticError("reference frequency must be positive", index, lineno)
            reference = mhz(val)
        elif head == "delay":
            if len(toks) != 3 or toks[2][0] != "us":
                col = toks[2][1] if len(toks) >= 3 else (toks[-1][1] + len(toks[-1][0]))
                raise SequenceSyntaxError("usage: delay <value> us", lineno, col)
            tau = _number(toks[1][0], lineno, toks[1][1], "delay")
            if tau < 0:
                raise SequenceSemanticError(f"negative delay {tau} us", index, lineno)
            elements.append(Delay(tau))
            cursor += tau
            index += 1
        elif head == "pulse":
            if len(toks) < 2:
                raise SequenceSyntaxError("missing pulse kind", lineno, hcol + len(head))
            kind, kcol = toks[1]
            if kind not in _KEYS:
                raise SequenceSyntaxError(f"unknown pulse kind {kind!r}", lineno, kcol)
            params, _ = _parse_params(kind, toks[2:], lineno)
            missing = [k for k in _REQUIRED[kind] if k not in params]
            if missing:
                raise SequenceSyntaxError(f"pulse {kind} missing {', '.join(missing)}", lineno, kcol)
            pulse = _build_pulse(kind, params, index, lineno)
            if "start" in params:
                start = params["start"]
                if start < cursor - _START_SLACK:
                    raise SequenceSemanticError(
                        f"pulse starting at {start} us overlaps the previous element ending at {cursor} us",
                        index,
                        lineno,
                    )
                if start > cursor + _START_SLACK:
                    elements.append(Delay(start - cursor))
                    index += 1
                    cursor = start
            elements.append(pulse)
            cursor += pulse.duration
            index += 1
        else:
            raise SequenceSyntaxError(f"unknown statement {head!r}", lineno, hcol)
    return SequenceSpec(tuple(elements), reference)


def load_sequence(path):
    return parse_sequence_file(Path(path).read_bytes())


def shipped_example(name="two_passage_echo.seq"):
    """Path of a sequence file bundled with the package."""
    return Path(__file__).with_name("data") / name
