"""Scikit-learn style transformers for the distortion models.

Each transformer maps ``(n, 2)`` undistorted STMap coordinates to distorted
ones, so the models compose with pipelines and parameter search.  Rows the
model cannot map come back as NaN.
"""
from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_points
from .maps.lens import lens_distort
from .maps.types import LensParams, UniversalParams
from .maps.universal import mapping_vector, universal_st


class UniversalPerspective(TransformerMixin, BaseEstimator):
    """Universal Perspective distortion of STMap coordinates.

    Parameters
    ----------
    fov : float
        Angle of view in degrees (below 180 for STMap output).
    fov_type : str
        AOV normalization axis: ``h``, ``v``, ``d``, ``4x3h`` or ``16x9h``.
    k, l, s : float
        Perspective type, cylindrical factor and anamorphic correction.
    aspect : float
        Frame width over height.
    """

    def __init__(self, fov=90.0, fov_type="h", k=1.0, l=1.0, s=0.98, aspect=1.0):
        self.fov = fov
        self.fov_type = fov_type
        self.k = k
        self.l = l
        self.s = s
        self.aspect = aspect

    def fit(self, X=None, y=None):
        """Validate the parameters; the model has nothing to learn."""
        self.params_ = UniversalParams(math.radians(self.fov), self.fov_type, self.k, self.l, self.s)
        self.mapping_vector_ = mapping_vector(self.aspect, self.params_.fov_type)
        if X is not None:
            self.n_features_in_ = check_points(X).shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "params_")
        X = check_points(X)
        st, valid = universal_st(X, self.params_, self.aspect)
        return np.where(valid[:, None], st, np.nan)


class LensDistortion(TransformerMixin, BaseEstimator):
    """Lens distortion of STMap coordinates.

    ``k`` holds the radial series, ``p`` thin prism, ``q`` decentering and
    ``c`` cardinal offset coefficients.
    """

    def __init__(self, k=(0.0, 0.0), p=(0.0, 0.0), q=(0.0, 0.0), c=(0.0, 0.0), fov_type="d", aspect=1.0):
        self.k = k
        self.p = p
        self.q = q
        self.c = c
        self.fov_type = fov_type
        self.aspect = aspect

    def fit(self, X=None, y=None):
        self.params_ = LensParams(self.k, self.p, self.q, self.c, self.fov_type)
        self.mapping_vector_ = mapping_vector(self.aspect, self.params_.fov_type)
        if X is not None:
            self.n_features_in_ = check_points(X).shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "params_")
        X = check_points(X)
        st, valid = lens_distort(X, self.params_, self.aspect)
        return np.where(valid[:, None], st, np.nan)
