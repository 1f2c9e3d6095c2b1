"""Demographic model of real GDP per capita growth and its econometric validation.

The core modules are usable on their own:

* :mod:`demogrowth.series` - year-indexed series and transforms
* :mod:`demogrowth.model` - the growth equation, its inverse and calibration
* :mod:`demogrowth.ols` - least squares and Jarque-Bera
* :mod:`demogrowth.unitroot` - ADF and DF-GLS with critical values
* :mod:`demogrowth.cointegration` - Engle-Granger, Johansen and VECM
* :mod:`demogrowth.var` - VAR estimation, lag selection and diagnostics

:mod:`demogrowth.pipeline` ties them together behind the ``demogrowth`` CLI.
"""

__version__ = "0.1.0"

from demogrowth.errors import DemogrowthError  # noqa: E402
from demogrowth.series import AnnualSeries  # noqa: E402

__all__ = ["AnnualSeries", "DemogrowthError", "__version__"]
