import pytest

from sysask.corpus.types import ClaritDialogue, SourceDialogue


@pytest.fixture
def source_dialogue():
    return SourceDialogue(
        id="d1",
        knowledge="The farm grant requires that you are a family farmer and you work .",
        request="Can I get the farm grant ?",
        turns=[("Are you a family farmer ?", "Yes"), ("Do you work ?", "No")],
        final_answer="No",
    )


@pytest.fixture
def clarit_dialogue():
    return ClaritDialogue(
        id="c1",
        request="Can I get the farm grant ?",
        user_profile=["I am a family farmer."],
        knowledge="The farm grant requires that you are a family farmer and you work .",
        turns=[("Do you work ?", "Yes")],
        final_answer="Yes",
        removed_indices=[0],
    )
