"""Model formulas, built into design matrices by patsy.

    y ~ x1 + C(x2) + spline(x3; 50,65) + x4:x5

Everything patsy understands is accepted. ``C()`` gives treatment dummies with the
first sorted level as reference and ``a:b`` is an interaction. ``spline(col; k1,k2)``
(or ``spline(col, (k1, k2))``) adds a linear spline basis with columns named
``col``, ``col>k1``, ... The intercept is always part of the model and is supplied
by the fitter, so formulas that remove it are rejected.
"""
import ast
import re
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
import pandas as pd
import patsy
from patsy import EvalEnvironment, ModelDesc, PatsyError

from svyrsq.utils import Dataset, SchemaError
from .spline import SplineSpec, spline_basis

_SPLINE_RE = re.compile(r"spline\(\s*([^;(),]+?)\s*;\s*([^)]*)\)")
_PATSY_INTERCEPT = "Intercept"


def spline(x, knots) -> np.ndarray:
    return spline_basis(np.asarray(x, dtype=np.float64), SplineSpec(knots=list(knots)))


_EVAL_ENV = EvalEnvironment([{"spline": spline}])


def _knots(text: str) -> List[float]:
    try:
        return SplineSpec(knots=[float(k) for k in text.split(",") if k.strip()]).knots
    except ValueError as e:
        raise SchemaError(f"Invalid spline knots `{text}`: {e}") from e


def _rewrite_splines(text: str) -> str:
    """``spline(x; 50,65)`` becomes the Python call ``spline(x, (50.0, 65.0))``."""
    def repl(m):
        knots = "".join(f"{k!r}, " for k in _knots(m.group(2)))
        return f"spline({m.group(1)}, ({knots.rstrip()}))"
    return _SPLINE_RE.sub(repl, text)


def _factor_columns(code: str) -> List[str]:
    """Data columns a patsy factor reads, in order of appearance."""
    try:
        tree = ast.parse(code.strip(), mode="eval")
    except SyntaxError as e:
        raise SchemaError(f"Cannot parse formula factor `{code}`.") from e
    columns = []

    def visit(node):
        if isinstance(node, ast.Call):
            if isinstance(node.func, ast.Name) and node.func.id == "Q" and node.args \
                    and isinstance(node.args[0], ast.Constant):
                columns.append(str(node.args[0].value))
                return
            for arg in list(node.args) + [kw.value for kw in node.keywords]:
                visit(arg)
        elif isinstance(node, ast.Name):
            columns.append(node.id)
        else:
            for child in ast.iter_child_nodes(node):
                visit(child)

    visit(tree.body)
    return columns


def _spline_names(code: str):
    """Column names for a factor that is a single spline call, else None."""
    call = ast.parse(code.strip(), mode="eval").body
    if not (isinstance(call, ast.Call) and isinstance(call.func, ast.Name) and call.func.id == "spline"
            and len(call.args) == 2):
        return None
    try:
        knots = ast.literal_eval(call.args[1])
    except ValueError:
        return None
    return SplineSpec(knots=list(knots)).column_names(ast.unparse(call.args[0]))


def _is_intercept(term) -> bool:
    return len(term.factors) == 0


@dataclass(frozen=True, eq=False)
class Formula:
    text: str
    desc: ModelDesc

    @classmethod
    def parse(cls, text: str) -> "Formula":
        text = text.strip()
        if text.count("~") != 1:
            raise SchemaError(f"Formula must have the form `y ~ terms`, got `{text}`.")
        try:
            desc = ModelDesc.from_formula(_rewrite_splines(text))
        except PatsyError as e:
            raise SchemaError(f"Cannot parse formula `{text}`: {e}") from e
        if len(desc.lhs_termlist) != 1 or len(desc.lhs_termlist[0].factors) != 1:
            raise SchemaError(f"Formula `{text}` needs exactly one response variable.")
        if not any(_is_intercept(t) for t in desc.rhs_termlist):
            raise SchemaError(f"Formula `{text}` removes the intercept; the fitter always includes one.")
        for term in desc.rhs_termlist:
            for factor in term.factors:
                _factor_columns(factor.code)
        return cls(text=text, desc=desc)

    @property
    def response(self) -> str:
        return self.desc.lhs_termlist[0].factors[0].code

    @property
    def terms(self) -> Tuple[str, ...]:
        return tuple(t.name() for t in self.desc.rhs_termlist if not _is_intercept(t))

    @property
    def columns(self) -> List[str]:
        seen = []
        for term in self.desc.lhs_termlist + self.desc.rhs_termlist:
            for factor in term.factors:
                seen.extend(c for c in _factor_columns(factor.code) if c not in seen)
        return seen

    def __str__(self) -> str:
        return self.text

    def matrices(self, frame: pd.DataFrame) -> Tuple[np.ndarray, np.ndarray, List[str]]:
        """Response, predictor matrix without the intercept column, predictor names."""
        try:
            y, X = patsy.dmatrices(self.desc, frame, eval_env=_EVAL_ENV, NA_action="raise",
                                   return_type="dataframe")
        except PatsyError as e:
            raise SchemaError(f"Cannot build design matrix for `{self.text}`: {e}") from e
        if y.shape[1] != 1:
            raise SchemaError(f"Response `{self.response}` must be numeric, got columns {list(y.columns)}.")

        info = X.design_info
        names = list(info.column_names)
        for term, columns in info.term_slices.items():
            if len(term.factors) == 1:
                spline_names = _spline_names(term.factors[0].code)
                if spline_names is not None:
                    names[columns] = spline_names
        keep = [j for j, name in enumerate(info.column_names) if name != _PATSY_INTERCEPT]
        return y.to_numpy(dtype=np.float64).reshape(-1), X.to_numpy(dtype=np.float64)[:, keep], \
            [names[j] for j in keep]

    def design(self, frame: pd.DataFrame) -> Tuple[np.ndarray, List[str]]:
        _, X, names = self.matrices(frame)
        return X, names

    def build(self, frame: pd.DataFrame, weights=None) -> Dataset:
        y, X, names = self.matrices(frame)
        return Dataset(y=y, X=X, weights=weights, names=names)
