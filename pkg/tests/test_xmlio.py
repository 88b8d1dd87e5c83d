import dataclasses
import random
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from docgen import random_document
from fersml.model import validate_document
from fersml.xmlio import (
    FACET,
    MALFORMED,
    MISSING,
    UNKNOWN,
    FersmlSyntaxError,
    check_fersml,
    parse_fersml,
    serialize_fersml,
)


def _diagnostics(data: bytes):
    doc, diagnostics = check_fersml(data)
    assert doc is None
    assert diagnostics, "failure must carry diagnostics"
    return diagnostics


def test_sample_structure(sample_doc):
    assert len(sample_doc.coach.starting_team) == 12
    assert len(sample_doc.avatars) == 1
    assert len(sample_doc.simulation.tactics) == 1
    formation = sample_doc.simulation.tactics[0]
    assert formation.name == "3-3-3"
    assert len(formation.positions) == 10
    assert (formation.positions[0].coord_x, formation.positions[0].coord_y) == (10, 320)


def test_sample_whitespace_tokens(sample_doc):
    person = sample_doc.avatars[0].person
    assert person.usual_position == "attacking midfielder"
    assert person.actual_position == "left winger"


def test_empty_bytes_is_malformed():
    (d,) = _diagnostics(b"")
    assert d.kind == MALFORMED
    assert d.line >= 1 and d.column >= 1


def test_unclosed_tag_is_malformed(sample_xml):
    (d,) = _diagnostics(sample_xml.replace(b"</fersml>", b""))
    assert d.kind == MALFORMED


def test_swapped_coach_and_avatar(sample_xml):
    text = sample_xml.decode()
    coach = re.search(r"<coach>.*?</coach>", text, re.S).group(0)
    avatar = re.search(r"<avatar>.*?</avatar>", text, re.S).group(0)
    swapped = text.replace(coach, "\0").replace(avatar, coach).replace("\0", avatar)
    kinds = {d.kind for d in _diagnostics(swapped.encode())}
    assert MISSING in kinds


def test_unknown_element(sample_xml):
    data = sample_xml.replace(b"<age>99</age>", b"<age>99</age><shoe_size>44</shoe_size>")
    (d,) = _diagnostics(data)
    assert d.kind == UNKNOWN
    assert "shoe_size" in d.message


def test_unknown_attribute(sample_xml):
    data = sample_xml.replace(b'<person squad_number="99">', b'<person squad_number="99" nick="x">')
    (d,) = _diagnostics(data)
    assert d.kind == UNKNOWN


def test_facet_violation_is_located(sample_xml):
    data = sample_xml.replace(b'player_id="1" squad_number="9"', b'player_id="12" squad_number="9"')
    (d,) = _diagnostics(data)
    assert d.kind == FACET
    assert "maxInclusive=11" in d.message
    assert d.line == 6


def test_non_numeric_text(sample_xml):
    (d,) = _diagnostics(sample_xml.replace(b"<age>99</age>", b"<age>old</age>"))
    assert d.kind == FACET


def test_numeric_text_is_trimmed(sample_xml):
    doc = parse_fersml(sample_xml.replace(b"<age>99</age>", b"<age>\n  42 \n</age>"))
    assert doc.avatars[0].person.age == 42


def test_dtd_is_rejected(sample_xml):
    data = sample_xml.replace(b"<fersml>", b'<!DOCTYPE fersml [<!ENTITY x "y">]>\n<fersml>', 1)
    (d,) = _diagnostics(data)
    assert d.kind == MALFORMED


def test_parse_raises_with_diagnostics():
    with pytest.raises(FersmlSyntaxError) as info:
        parse_fersml(b"<fersml/>")
    assert info.value.diagnostics


def test_round_trip_sample(sample_doc):
    assert parse_fersml(serialize_fersml(sample_doc)) == sample_doc


def test_zero_avatars_round_trip(sample_doc):
    doc = dataclasses.replace(sample_doc, avatars=())
    data = serialize_fersml(doc)
    assert b"<avatar" not in data
    assert parse_fersml(data) == doc


def test_prob_value_round_trip(sample_doc):
    again = parse_fersml(serialize_fersml(sample_doc))
    table = again.avatars[0].estimations.shutting_goal
    assert abs(dict(table.entries)[5.0] - 0.89) < 1e-9


def test_serializer_uses_two_space_indentation(sample_doc):
    lines = serialize_fersml(sample_doc).decode().splitlines()
    assert lines[0].startswith("<?xml")
    assert lines[2] == "  <coach>"
    for line in lines[1:]:
        indent = len(line) - len(line.lstrip(" "))
        assert indent % 2 == 0


def test_serialization_is_stable(sample_doc):
    once = serialize_fersml(sample_doc)
    assert serialize_fersml(parse_fersml(once)) == once


@settings(max_examples=60, deadline=None)
@given(st.randoms(use_true_random=False))
def test_random_round_trip(rnd):
    doc = random_document(random.Random(rnd.random()))
    again = parse_fersml(serialize_fersml(doc))
    assert again == doc
    assert validate_document(again).ok


@settings(max_examples=60, deadline=None)
@given(st.binary(max_size=200))
def test_accepted_bytes_validate(data):
    doc, diagnostics = check_fersml(data)
    if doc is None:
        assert diagnostics
    else:
        assert validate_document(doc).ok
