import pytest

from qaspan.languages import default_registry
from qaspan.squad import QA, Answer, Article, Paragraph, SquadDataset
from qaspan.synthetic import generate_corpus


@pytest.fixture(scope="session")
def registry():
    return default_registry()


@pytest.fixture(scope="session")
def marathi(registry):
    return registry.get("mr")


@pytest.fixture(scope="session")
def corpus():
    return generate_corpus(200, seed=7)


@pytest.fixture
def tiny():
    ctx = "Pune is a city. It lies on the Mula river. The fort was built in 1670."
    qas = (
        QA("a1", "What is Pune?", False, (Answer("a city", 8),)),
        QA("a2", "Which river?", False, (Answer("Mula river", ctx.index("Mula")),)),
        QA("a3", "Who was king?", True, (), (Answer("fort", ctx.index("fort")),)),
    )
    return SquadDataset("v2.0", (Article("Pune", (Paragraph(ctx, qas),)),))
