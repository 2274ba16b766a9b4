import pytest
from mpmath import mp

from bsdeform.config import Config
from bsdeform.group import Signature, build_domain
from bsdeform.netpartition import build_net

REGRESSION = [(6, 6, 3), (4, 4, 3), (4, 6, 2), (8, 4, 3), (4, 6, 5)]
WORD_663 = "4,4,2,2,3,1,4,4,1,4,4,4"
WORD_443 = "3,2,4,1,3,1,4,1,3,2,2,3,1,4"


def net_for(sig, prec=256):
    return build_net(build_domain(Signature(*sig), prec))


@pytest.fixture(scope="session")
def config():
    return Config()


@pytest.fixture(scope="session")
def nets():
    return {sig: net_for(sig) for sig in REGRESSION}


@pytest.fixture(params=REGRESSION, ids=lambda s: "sig%d%d%d" % s)
def net(request, nets):
    return nets[request.param]


@pytest.fixture
def prec256():
    with mp.workprec(256):
        yield
