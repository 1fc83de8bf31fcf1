"""
JSON documents describing potentials:

    {"symmetry": 4, "period": 6.28, "terms": [{"k": [1, 0], "re": 0.5,
     "im": 0.0}, ...]}

and superpositions:

    {"kind": "linear", "alpha": 0.64, "a": [0, 0], "lambda": 1.0,
     "Q": {"monomials": [[1, 1, 1.0]]}, "v1": {...}, "u": {...}}
"""
import json
from pathlib import Path

from novikov_cli.core.potential import (
    BivariatePolynomial, CompositionKind, FourierTerm, Potential,
    PotentialSpec, SuperpositionSpec,
)
from novikov_cli.utils.exceptions import NovikovCliValidationException


def potential_to_dict(spec: Potential) -> dict:
    if isinstance(spec, SuperpositionSpec):
        data = {
            'kind': spec.kind.value,
            'alpha': spec.alpha,
            'a': list(spec.a),
            'lambda': spec.lam,
        }
        if spec.q is not None:
            data['Q'] = {'monomials': [list(m) for m in spec.q.monomials]}
        data['v1'] = potential_to_dict(spec.v1)
        data['u'] = potential_to_dict(spec.u)
        return data
    return {
        'symmetry': int(spec.symmetry),
        'period': spec.period_T,
        'terms': [{'k': list(t.k), 're': complex(t.coeff).real,
                   'im': complex(t.coeff).imag} for t in spec.terms],
    }


def _periodic_from_dict(data: dict) -> PotentialSpec:
    try:
        terms = tuple(
            FourierTerm((int(t['k'][0]), int(t['k'][1])),
                        complex(float(t.get('re', 0.0)),
                                float(t.get('im', 0.0))))
            for t in data.get('terms', []))
        return PotentialSpec(data['symmetry'], float(data['period']), terms)
    except (KeyError, TypeError, ValueError, IndexError) as e:
        raise NovikovCliValidationException(
            f'Malformed potential document: {e}')


def potential_from_dict(data: dict) -> Potential:
    if not isinstance(data, dict):
        raise NovikovCliValidationException(
            'Potential document must be a JSON object')
    if 'v1' not in data:
        return _periodic_from_dict(data)
    try:
        q = None
        if 'Q' in data:
            q = BivariatePolynomial(tuple(
                (int(i), int(j), float(c))
                for i, j, c in data['Q']['monomials']))
        return SuperpositionSpec(
            v1=_periodic_from_dict(data['v1']),
            u=_periodic_from_dict(data['u']),
            kind=CompositionKind(data.get('kind', 'linear')),
            alpha=float(data.get('alpha', 0.0)),
            a=tuple(data.get('a', (0.0, 0.0))),
            lam=float(data.get('lambda', 1.0)),
            q=q,
        )
    except (KeyError, TypeError, ValueError) as e:
        raise NovikovCliValidationException(
            f'Malformed superposition document: {e}')


def load_potential(path: str | Path) -> Potential:
    try:
        with open(path) as file:
            data = json.load(file)
    except (OSError, json.JSONDecodeError) as e:
        raise NovikovCliValidationException(
            f'Cannot read potential from {path}: {e}')
    return potential_from_dict(data)


def dump_potential(spec: Potential, path: str | Path):
    with open(path, 'w') as file:
        json.dump(potential_to_dict(spec), file, indent=4)
