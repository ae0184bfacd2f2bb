from ipaddress import IPv4Address

import pytest
from hypothesis import given

from generators import policies
from xdnp.lexer import TokenKind as K
from xdnp.lexer import lex
from xdnp.model import Condition, Connector, Drop, Field, Forward, Policy, PolicyError, Rule, canonical_xml
from xdnp.parser import parse, parse_file, parse_text


def offset(source, span):
    lines = source.split("\n")
    return sum(len(l) + 1 for l in lines[: span.line - 1]) + span.column - 1


def token_deletion_mutants(source):
    """The source with each markup/content token removed in turn."""
    for tok in lex(source)[:-1]:
        start = offset(source, tok.span)
        yield tok, source[:start] + source[start + tok.span.length:]


def span_inside(source, span):
    lines = source.split("\n")
    return 1 <= span.line <= len(lines) and 1 <= span.column <= len(lines[span.line - 1]) + 1


def test_demo_document(demo_source, demo_policy):
    policy = parse(lex(demo_source))
    assert policy == demo_policy
    assert policy.rules[0].conditions[1].connector is Connector.OR
    assert policy.rules[1].action == Drop()


def test_empty_rules():
    assert parse_text('<SDN name="X"><rules></rules></SDN>') == Policy("X", [])


def test_omitted_connector_defaults_to_and():
    src = ('<SDN name="X"><rules><rule><condition>src_prt=1</condition>'
           '<condition>dest_prt=2</condition><action>3</action></rule></rules></SDN>')
    (rule,) = parse_text(src).rules
    assert [c.connector for c in rule.conditions] == [None, Connector.AND]
    assert rule.action == Forward(3)


def test_explicit_and():
    src = ('<SDN name="X"><rules><rule><condition>src_prt=1</condition>'
           '<condition connector="and">dest_ip=10.1.2.3</condition><action>0</action></rule></rules></SDN>')
    (rule,) = parse_text(src).rules
    assert rule.conditions[1] == Condition(Field.DST_IP, IPv4Address("10.1.2.3"), Connector.AND)


def wrap(rules):
    return f'<SDN name="X">\n<rules>\n{rules}\n</rules>\n</SDN>\n'


def errors_of(source, **kw):
    with pytest.raises(PolicyError) as exc:
        parse_text(source, **kw)
    return exc.value.diagnostics


def test_missing_action_names_rule_span():
    src = wrap("<rule>\n<condition>src_prt=23</condition>\n</rule>")
    (diag,) = errors_of(src)
    assert "no <action>" in diag.message
    assert (diag.span.line, diag.span.column) == (3, 1)


def test_empty_condition_list():
    (diag,) = errors_of(wrap("<rule><action>1</action></rule>"))
    assert "empty condition list" in diag.message


def test_recovery_reports_each_broken_rule():
    src = wrap(
        "<rule><condition>src_prt=</condition><action>1</action></rule>\n"
        "<rule><condition>src_prt=1</condition><action>1</action></rule>\n"
        "<rule><condition>bogus=1</condition><action>1</action></rule>")
    diags = errors_of(src)
    assert [d.span.line for d in diags] == [3, 5]
    assert "unknown field 'bogus'" in diags[1].message
    assert len(errors_of(src, fail_fast=True)) == 1


def test_semantic_errors_surface_through_parse_text():
    diags = errors_of(wrap('<rule><condition connector="or">src_ip=23</condition><action>0</action></rule>'))
    assert len(diags) == 2
    assert all(d.span.line == 3 for d in diags)


@pytest.mark.parametrize("body,fragment", [
    ('<rule><condition connector="xor">src_prt=1</condition><action>1</action></rule>', "connector"),
    ('<rule><condition kind="x">src_prt=1</condition><action>1</action></rule>', "unknown attribute"),
    ("<rule><condition>src_prt=1</condition><action>10.0.0.1</action></rule>", "output port"),
    ("<rule><condition>src_prt=1</condition><action>1</action><action>1</action></rule>", "</rule>"),
    ("<rule><condition>src_prt=1</condition><action>1</action></rules>", "</rule>"),
    ("<rule><condition>src_prt 1</condition><action>1</action></rule>", "'='"),
])
def test_syntax_errors(body, fragment):
    diags = errors_of(wrap(body))
    assert any(fragment in d.message for d in diags)


@pytest.mark.parametrize("src", [
    '<SDN><rules></rules></SDN>',
    '<SDN name="1x"><rules></rules></SDN>',
    '<SDN name="X" other="y"><rules></rules></SDN>',
    '<SDN name="X" name="Y"><rules></rules></SDN>',
    '<SDN name="X"><rules></rules></SDN><SDN name="Y">',
    '<SDN name="X"></SDN>',
    '<rules></rules>',
])
def test_document_level_errors(src):
    assert errors_of(src)


def test_whitespace_only_document():
    (diag,) = errors_of("  \n\t\n")
    assert "expected <SDN>" in diag.message


def test_parse_requires_eof_token():
    with pytest.raises(ValueError):
        parse(lex('<SDN name="X"><rules></rules></SDN>')[:-1])


def test_parse_file(demo_path, demo_policy, tmp_path):
    assert parse_file(demo_path) == demo_policy
    with pytest.raises(OSError):
        parse_file(tmp_path / "missing.xml")
    bad = tmp_path / "bad.xml"
    bad.write_bytes(b"\xff\xfe<SDN")
    with pytest.raises(OSError):
        parse_file(bad)
    blank = tmp_path / "blank.xml"
    blank.write_text("\n\n")
    with pytest.raises(PolicyError):
        parse_file(blank)


def test_every_token_deletion_is_rejected(demo_source):
    mutants = list(token_deletion_mutants(demo_source))
    assert len(mutants) >= 8
    for tok, mutant in mutants:
        with pytest.raises(PolicyError) as exc:
            parse_text(mutant)
        for diag in exc.value.diagnostics:
            assert span_inside(mutant, diag.span), (tok, diag)


@given(policies())
def test_round_trip(policy):
    assert parse(lex(canonical_xml(policy))) == policy


@given(policies())
def test_document_order_preserved(policy):
    parsed = parse_text(canonical_xml(policy))
    assert [r.conditions for r in parsed.rules] == [r.conditions for r in policy.rules]


def test_spans_attached(demo_source):
    policy = parse_text(demo_source)
    assert policy.rules[0].span.line == 6
    assert policy.rules[1].conditions[0].span.line == 14


def test_deterministic(demo_source):
    assert lex(demo_source) == lex(demo_source)
    assert parse(lex(demo_source)) == parse(lex(demo_source))


def test_no_token_kind_left_unused():
    used = {t.kind for t in lex(canonical_xml(Policy("X", [Rule(
        [Condition(Field.SRC_IP, IPv4Address("1.2.3.4")), Condition(Field.SRC_PORT, 1, Connector.OR)],
        Forward(1))])))}
    assert set(K) - used == {K.IDENTIFIER}
