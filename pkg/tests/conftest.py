import hypothesis
import pytest

from sieve.config import PipelineConfig

hypothesis.settings.register_profile("ci", max_examples=60, deadline=None)
hypothesis.settings.load_profile("ci")


@pytest.fixture(scope="session")
def config():
    return PipelineConfig()


@pytest.fixture(scope="session")
def dict_tokenizer(config):
    return config.pipeline_tokenizer()


@pytest.fixture(scope="session")
def ws_tokenizer():
    from sieve.thai import WhitespaceTokenizer

    return WhitespaceTokenizer()


@pytest.fixture(scope="session")
def stopwords(config):
    return config.load_lexicon("stopwords")


@pytest.fixture(scope="session")
def naughty(config):
    return config.load_lexicon("naughty")


@pytest.fixture(scope="session")
def gambling(config):
    return config.load_lexicon("gambling")
