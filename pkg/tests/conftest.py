import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fluentqa import datasets, ngram, stgen, treebank

FIG2_TREE = (
    "(ROOT (SBARQ (WHNP (WDT what) (NN year)) (SQ (VBD did) "
    "(NP (DT the) (NNPS Netherlands)) (VP (VB rise) (PRT (RP up)) "
    "(PP (IN against) (NP (NNP Philip) (NNP II))))) (. ?)))"
)


@pytest.fixture(scope="session")
def fig2_instance():
    tree = treebank.parse_ptb(FIG2_TREE)
    return stgen.QAInstance("fig2", tuple(tree.tokens()), tree, ("1568",))


@pytest.fixture(scope="session")
def mini_corpus():
    return datasets.mini_sg_corpus()


@pytest.fixture(scope="session")
def lm2(mini_corpus):
    return ngram.train(mini_corpus, 2)


@pytest.fixture(scope="session")
def lm3(mini_corpus):
    return ngram.train(mini_corpus, 3)
