import pytest

from mtpipe.errors import DataError
from mtpipe.registry import is_known, language_name, languages


def test_exactly_102_languages():
    assert len(languages()) == 102


def test_codes_unique_and_sorted():
    codes = [lang.code for lang in languages()]
    assert len(set(codes)) == len(codes)
    assert codes == sorted(codes)


def test_names_present():
    for lang in languages():
        assert lang.code and lang.name
        assert lang.code == lang.code.lower()


def test_known_codes():
    for code, name in [("en", "English"), ("zh", "Chinese"), ("fr", "French"), ("bo", "Tibetan")]:
        assert is_known(code)
        assert language_name(code) == name


def test_unknown_code_rejected():
    assert not is_known("xx")
    with pytest.raises(DataError):
        language_name("xx")
