import pytest

from helpers import CORPUS, corpus_path
from solinterval.frontend import (
    LexError, ParseError, TokenKind, TypeCheckError, ast as A, check_types,
    parse_source, pretty_print, tokenize,
)


def kinds(src):
    return [(t.kind, t.lexeme) for t in tokenize(src)]


def test_tokenize_declaration():
    assert kinds("uint index=0;") == [
        (TokenKind.KEYWORD, "uint"), (TokenKind.IDENTIFIER, "index"),
        (TokenKind.OPERATOR, "="), (TokenKind.INTEGER, "0"), (TokenKind.PUNCT, ";"),
    ]


def test_tokenize_require():
    assert [lx for _, lx in kinds("require(x<15);")] == ["require", "(", "x", "<", "15", ")", ";"]
    assert kinds("require(x<15);")[0][0] == TokenKind.IDENTIFIER


def test_tokenize_rejects_illegal_char():
    with pytest.raises(LexError) as err:
        tokenize("uint @x;")
    assert (err.value.line, err.value.column, err.value.char) == (1, 6, "@")


def test_comments_skipped_and_positions():
    toks = tokenize("// hi\n  x = 1; // tail\n")
    assert [t.lexeme for t in toks] == ["x", "=", "1", ";"]
    assert (toks[0].line, toks[0].column) == (2, 3)


def test_empty_contract():
    [c] = parse_source("contract C {}")
    assert c.name == "C" and c.state_vars == [] and c.functions == []


def test_magic_number_listing_shape():
    [c] = parse_source(corpus_path("magic_number.sol").read_text())
    fn = c.function("magicNumber")
    stmts = list(A.walk_statements(fn.body))
    assert len(stmts) == 9
    top = fn.body.stmts
    assert [type(s).__name__ for s in top] == ["VarDecl", "VarDecl", "Require", "While", "Return"]
    loop = top[3]
    assert isinstance(loop.body.stmts[0], A.If) and isinstance(loop.body.stmts[1], A.Assign)


def test_deposit_contract_listing():
    [c] = parse_source(corpus_path("deposit_contract.sol").read_text())
    assert [f.name for f in c.functions] == ["deposit", "withdraw"]
    [sv] = c.state_vars
    assert sv.name == "deposits"
    assert sv.var_type == A.MappingType(A.AddressType(), A.UIntType())
    assert c.pragmas


def test_parse_error_reports_line():
    with pytest.raises(ParseError) as err:
        parse_source("contract C {\n function f() public {\n uint x = ;\n }\n}")
    assert err.value.line == 3


def test_typed_deposit_expression():
    [c] = parse_source(corpus_path("deposit_contract.sol").read_text())
    typed = check_types(c)
    assign = typed.function("deposit").body.stmts[1]
    assert isinstance(assign.value, A.Binary)
    assert assign.value.type == A.UIntType()


@pytest.mark.parametrize("body", ["bool b = true + 1;", "uint z = y;", "uint z = 1; z[0] = 2;",
                                  "frobnicate(1);"])
def test_type_errors(body):
    [c] = parse_source("contract C { function f() public { " + body + " } }")
    with pytest.raises(TypeCheckError):
        check_types(c)


@pytest.mark.parametrize("path", sorted(CORPUS.glob("*.sol")), ids=lambda p: p.name)
def test_round_trip(path):
    first = parse_source(path.read_text())
    again = parse_source("\n".join(pretty_print(c) for c in first))
    assert again == first
    for c in first:
        check_types(c)


def test_error_line_matches_hand_count():
    src = corpus_path("bid_contract.sol").read_text().replace("newBid>10", "newBid>>10")
    with pytest.raises((ParseError, LexError)) as err:
        parse_source(src)
    assert err.value.line == 8
