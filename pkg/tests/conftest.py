import pytest

from likerent.economics import ETHEREUM, default_gas_schedule
from likerent.exhibitor import Exhibitor, PolicySet
from likerent.ledger import Ledger
from likerent.rental import RentalContract
from likerent.token import TokenRegistry

ETH = 10**18


class Env:
    def __init__(self, k: int = 1, policies: PolicySet | None = None):
        self.schedule = default_gas_schedule()
        self.ledger = Ledger(self.schedule, ETHEREUM.gas_price_wei)
        for name, rnt in (("deployer", 0), ("exhibitor", 0), ("alice", 1000), ("bob", 1000), ("carol", 0)):
            self.ledger.open_account(name, ETH, rnt)
        self.tokens = TokenRegistry(self.ledger)
        self.contract = RentalContract.deploy(self.ledger, self.tokens, "deployer", "exhibitor")
        self.exhibitor = Exhibitor(self.contract, k, policies if policies is not None else PolicySet())
        self.tokens.mint_nft("alice", 1, "ipfs://x")

    def fee(self, op: str) -> int:
        return self.schedule[op] * self.ledger.gas_price_wei

    def listed(self, price: int = 2, days: int = 30) -> int:
        return self.contract.create_lend_order("alice", 1, price, days).order_id

    def rented(self, price: int = 2, days: int = 10, max_likes: int = 100) -> int:
        oid = self.listed(price)
        self.contract.rent("bob", oid, days, max_likes)
        return oid


@pytest.fixture
def env():
    return Env()


@pytest.fixture
def make_env():
    return Env
