"""
Tests for reading and writing level functions.
"""
from fractions import Fraction

import numpy as np
import pytest

from juliagasket.core.exceptions import DomainError
from juliagasket.services.export_service import export_service


def test_function_keeps_fractions(tmp_path):
    values = [Fraction(1), Fraction(2, 5), Fraction(-1, 5)]
    path = export_service.write_function(values, tmp_path / "u.csv")
    loaded = export_service.read_function(path)
    assert loaded.dtype == object
    assert loaded.tolist() == values


def test_function_floats_are_bit_exact(tmp_path):
    values = np.random.default_rng(0).uniform(-1, 1, 12)
    path = export_service.write_function(values, tmp_path / "u.csv")
    loaded = export_service.read_function(path)
    assert loaded.dtype == float
    assert np.array_equal(loaded, values)


def test_exact_read_of_decimals(tmp_path):
    path = tmp_path / "u.csv"
    path.write_text("id,value\n0,0.5\n1,0.25\n")
    assert export_service.read_function(path, exact=True).tolist() == [Fraction(1, 2), Fraction(1, 4)]


def test_function_ids_must_be_in_order(tmp_path):
    path = tmp_path / "u.csv"
    path.write_text("id,value\n0,1\n2,0\n")
    with pytest.raises(DomainError):
        export_service.read_function(path)


def test_function_needs_header(tmp_path):
    path = tmp_path / "u.csv"
    path.write_text("0,1\n1,0\n")
    with pytest.raises(DomainError):
        export_service.read_function(path)
