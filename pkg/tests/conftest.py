"""Shared corpora and models, built once per session."""

from __future__ import annotations

import pytest

import bumpsense as bs


@pytest.fixture(scope="session")
def small_corpus():
    """12 segments x 12 train / 12 test impacts, fixed seeds."""
    train = [bs.segment_recording(seg, 12, 7000 + k) for k, seg in enumerate(bs.SEGMENT_IDS)]
    test = [bs.segment_recording(seg, 12, 7600 + k) for k, seg in enumerate(bs.SEGMENT_IDS)]
    return train, test


@pytest.fixture(scope="session")
def small_frames(small_corpus):
    train, test = small_corpus
    train_frames, _ = bs.detect_and_label(train)
    test_frames, _ = bs.detect_and_label(test)
    return train_frames, test_frames


@pytest.fixture(scope="session")
def small_models(small_frames):
    train_frames, _ = small_frames
    return bs.build_models(train_frames, list(bs.APPROACHES))


@pytest.fixture(scope="session")
def median_model(small_models):
    return small_models[bs.APPROACH_MEDIAN]
