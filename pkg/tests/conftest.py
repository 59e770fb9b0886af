from __future__ import annotations

from pathlib import Path

import pytest

from narrativetime import AnnotationDocument, parse_annotation_doc

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_bytes(name: str) -> bytes:
    return (FIXTURES / name).read_bytes()


def load_fixture(name: str) -> AnnotationDocument:
    return parse_annotation_doc(fixture_bytes(name))


@pytest.fixture
def fable_doc() -> AnnotationDocument:
    return load_fixture("two_travellers.ann_a.json")


@pytest.fixture
def fable_doc_b() -> AnnotationDocument:
    return load_fixture("two_travellers.ann_b.json")


@pytest.fixture
def movie_doc() -> AnnotationDocument:
    return load_fixture("movie_night.json")


@pytest.fixture
def meeting_doc() -> AnnotationDocument:
    return load_fixture("meeting.json")
