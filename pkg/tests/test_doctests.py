import doctest
import importlib

import pytest

MODULES = ["operator_core", "value_maps", "bell_model", "expectation_nogo",
           "convex_linear", "spekkens_nogo", "reduction", "cli"]


@pytest.mark.parametrize("name", MODULES)
def test_module_doctests(name):
    mod = importlib.import_module(f"nogo.{name}")
    result = doctest.testmod(mod, optionflags=doctest.NORMALIZE_WHITESPACE)
    assert result.failed == 0
