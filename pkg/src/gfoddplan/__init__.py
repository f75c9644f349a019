"""Symbolic dynamic programming with generalized first-order decision diagrams."""
from .diagram import AVG, MAX, Aggregator, Gfodd, If, OpenDiagram, build, constant, make, normalize
from .errors import (
    ConstructionError, EmptyDomainError, FormError, GfoddError, ModelError, ParseError,
    ResourceError, VocabularyError,
)
from .evaluate import EvalResult, eval_brute, eval_ve, evaluate
from .relational import Atom, Const, Interpretation, Predicate, Sort, Var, Vocabulary, atom, eq
from .serialize import from_text, to_dot, to_text

__version__ = "0.1.0"
