"""Satisfiability solving for straight-line string constraints.

The package decides constraints built from string concatenation,
finite-state transducer applications, and regular-language membership,
in the straight-line fragment (every variable defined at most once, no
cyclic dependencies).  Length, letter-count, character, index-of and
disequality constraints are supported through a bounded integer search.

Typical entry points: :func:`parse_problem` for the text format,
:func:`solve` for deciding, :func:`load_benchmark` for the bundled
web-sanitizer case studies, and the ``slsolve`` command-line tool.
"""

from .automata import (
    EPSILON,
    Alphabet,
    Nfa,
    nfa_complement,
    nfa_determinize,
    nfa_enumerate,
    nfa_eps_eliminate,
    nfa_from_word,
    nfa_intersect,
    nfa_is_empty,
    nfa_membership,
    nfa_none,
    nfa_nonempty_shortest,
    nfa_trim,
    nfa_union,
    nfa_universal,
)
from .constraints import (
    And,
    CharAtom,
    CharConst,
    CharPos,
    ConcatEq,
    CountTerm,
    Disequality,
    IndexOfAtom,
    IntTerm,
    Leaf,
    LenTerm,
    LinearAtom,
    Lit,
    Not,
    Or,
    Problem,
    RegAtom,
    TransducerEq,
    Var,
    evaluate,
    problem_wellformed,
)
from .oracle import OracleConfig, brute_force_solve, gen_random_problem
from .parser import ParseError, parse_problem, quote_word, unquote
from .regex import RegexSyntaxError, regex_parse
from .solver import Verdict, max_model_bound, solve
from .straightline import (
    CyclicDefinition,
    MultiplyDefined,
    NotStraightLine,
    check_straightline,
    dimension,
)
from .transducer import (
    Transducer,
    apply_function,
    erase_transducer,
    identity_transducer,
    post_image,
    pre_image,
    transducer_membership,
    transducer_normalize,
)
from .websec import (
    WEB_ALPHABET,
    BenchmarkCase,
    benchmark_names,
    builtin_transducer,
    escape_string_transducer,
    html_escape_transducer,
    innerhtml_decode_transducer,
    load_benchmark,
)

__version__ = "0.1.0"

__all__ = [
    "EPSILON",
    "Alphabet",
    "Nfa",
    "nfa_complement",
    "nfa_determinize",
    "nfa_enumerate",
    "nfa_eps_eliminate",
    "nfa_from_word",
    "nfa_intersect",
    "nfa_is_empty",
    "nfa_membership",
    "nfa_none",
    "nfa_nonempty_shortest",
    "nfa_trim",
    "nfa_union",
    "nfa_universal",
    "And",
    "CharAtom",
    "CharConst",
    "CharPos",
    "ConcatEq",
    "CountTerm",
    "Disequality",
    "IndexOfAtom",
    "IntTerm",
    "Leaf",
    "LenTerm",
    "LinearAtom",
    "Lit",
    "Not",
    "Or",
    "Problem",
    "RegAtom",
    "TransducerEq",
    "Var",
    "evaluate",
    "problem_wellformed",
    "OracleConfig",
    "brute_force_solve",
    "gen_random_problem",
    "ParseError",
    "parse_problem",
    "quote_word",
    "unquote",
    "RegexSyntaxError",
    "regex_parse",
    "Verdict",
    "max_model_bound",
    "solve",
    "CyclicDefinition",
    "MultiplyDefined",
    "NotStraightLine",
    "check_straightline",
    "dimension",
    "Transducer",
    "apply_function",
    "erase_transducer",
    "identity_transducer",
    "post_image",
    "pre_image",
    "transducer_membership",
    "transducer_normalize",
    "WEB_ALPHABET",
    "BenchmarkCase",
    "benchmark_names",
    "builtin_transducer",
    "escape_string_transducer",
    "html_escape_transducer",
    "innerhtml_decode_transducer",
    "load_benchmark",
    "__version__",
]
