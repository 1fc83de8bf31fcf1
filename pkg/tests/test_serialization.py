import json

import pytest

from novikov_cli.core.potential import (
    BivariatePolynomial, CompositionKind, SuperpositionSpec,
    make_symmetric_potential,
)
from novikov_cli.service.serialization import (
    dump_potential, load_potential, potential_from_dict, potential_to_dict,
)
from novikov_cli.utils.exceptions import NovikovCliValidationException


def test_periodic_document(tmp_path):
    spec = make_symmetric_potential(seed=4, symmetry=6)
    path = tmp_path / 'v.json'
    dump_potential(spec, path)
    data = json.loads(path.read_text())
    assert data['symmetry'] == 6
    assert len(data['terms']) == len(spec.terms)
    assert load_potential(path) == spec


def test_superposition_document():
    layer = make_symmetric_potential(seed=1)
    spec = SuperpositionSpec(layer, layer, CompositionKind.POINTWISE,
                             alpha=0.5, a=(0.1, 0.2), lam=1.5,
                             q=BivariatePolynomial.product())
    data = potential_to_dict(spec)
    assert data['Q'] == {'monomials': [[1, 1, 1.0]]}
    assert data['lambda'] == 1.5
    assert potential_from_dict(data) == spec


@pytest.mark.parametrize('data', [
    [],
    {'symmetry': 4},
    {'symmetry': 5, 'period': 1.0, 'terms': []},
    {'symmetry': 4, 'period': 1.0, 'terms': [{'k': [1]}]},
    {'v1': {'symmetry': 4, 'period': 1.0}, 'u': {'symmetry': 4,
                                                 'period': 1.0},
     'kind': 'cubic'},
])
def test_malformed_documents(data):
    with pytest.raises(NovikovCliValidationException):
        potential_from_dict(data)


def test_unreadable_file(tmp_path):
    path = tmp_path / 'broken.json'
    path.write_text('{not json')
    with pytest.raises(NovikovCliValidationException):
        load_potential(path)


_LAYER = {'symmetry': 4, 'period': 1.0,
          'terms': [{'k': [1, 0], 're': 1.0}]}


@pytest.mark.parametrize('q', [
    {},
    {'monomials': 3},
    {'monomials': [[1, 1]]},
    {'monomials': [['x', 1, 1.0]]},
])
def test_malformed_polynomial(q):
    data = {'kind': 'pointwise', 'v1': _LAYER, 'u': _LAYER, 'Q': q}
    with pytest.raises(NovikovCliValidationException):
        potential_from_dict(data)
