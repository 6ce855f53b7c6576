from fractions import Fraction

import pytest

from qmark.constants import constants, lambda_n
from qmark.errors import InvalidInput

# 60-digit values computed independently with mpmath (findroot for z)
KAPPA1 = Fraction("1.38848382726123460347758053379719044692713457045425943196198")
KAPPA2 = Fraction("4.40104873832827884429946636972048575702029827711069613747960")
KAPPA4 = Fraction("0.74864122986604728775217227077269559367670005183963201467843")
Z = Fraction("5.31972235583836466988680325288819700694742228743415638996664")


@pytest.mark.parametrize("name,value", [("kappa1", KAPPA1), ("kappa2", KAPPA2), ("kappa4", KAPPA4), ("z", Z)])
def test_contains_reference(name, value):
    iv = getattr(constants(128), name)
    slack = Fraction(1, 10**58)
    assert iv.lower - slack <= value <= iv.upper + slack
    assert iv.width <= Fraction(1, 10**30)


def test_identities():
    c = constants(96)
    # kappa4^2 = (kappa1 - 1) / log 2 and sqrt2^kappa1 = phi
    assert (c.kappa4 * c.kappa4).intersects(c.alpha)
    assert (c.sqrt2.log() * c.kappa1).exp().intersects(c.phi)


def test_lambda_n():
    assert 1 + Fraction(0) < lambda_n(1, 64).lower < Fraction(1619, 1000)
    with pytest.raises(InvalidInput):
        lambda_n(0, 64)


def test_precision_floor():
    with pytest.raises(InvalidInput):
        constants(16)


def test_json():
    j = constants(64).to_json(10)
    assert set(j) == {"phi", "kappa1", "kappa2", "kappa4", "z"}
