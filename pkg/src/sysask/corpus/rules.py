"""Rule table mapping (clarification question, yes/no answer) pairs to
declarative profile sentences.

A question is rewritten by stripping its leading auxiliary verb, flipping
second-person forms to first person, taking the first remaining token as
the subject, and filling the rule's template. Anything outside the rule
table is Untransformable and reported, never guessed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class UntransformableError(ValueError):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass
class RewriteRule:
    auxiliary: str
    affirmative_template: str  # placeholders: {subject}, {verb}, {body}
    negative_template: str

    def __post_init__(self):
        for tpl in (self.affirmative_template, self.negative_template):
            if tpl.count("{body}") != 1:
                raise ValueError(f"template {tpl!r} must contain exactly one {{body}}")


# Conjugation of "be" by subject, keyed by (auxiliary, subject-lowercase).
_BE_FORMS = {
    "are": {"i": "am", "he": "is", "she": "is", "it": "is"},
    "is": {"i": "am", "we": "are", "they": "are", "you": "are"},
    "was": {"we": "were", "they": "were", "you": "were"},
    "were": {"i": "was", "he": "was", "she": "was", "it": "was"},
    "have": {"he": "has", "she": "has", "it": "has"},
    "has": {"i": "have", "we": "have", "they": "have", "you": "have"},
    "do": {"he": "does", "she": "does", "it": "does"},
    "does": {"i": "do", "we": "do", "they": "do", "you": "do"},
}

DEFAULT_RULES = [
    RewriteRule("Are", "{subject} {verb} {body}", "{subject} {verb} not {body}"),
    RewriteRule("Is", "{subject} {verb} {body}", "{subject} {verb} not {body}"),
    RewriteRule("Was", "{subject} {verb} {body}", "{subject} {verb} not {body}"),
    RewriteRule("Were", "{subject} {verb} {body}", "{subject} {verb} not {body}"),
    RewriteRule("Do", "{subject} {body}", "{subject} do not {body}"),
    RewriteRule("Does", "{subject} {body}", "{subject} does not {body}"),
    RewriteRule("Did", "{subject} {body}", "{subject} did not {body}"),
    RewriteRule("Have", "{subject} {verb} {body}", "{subject} {verb} not {body}"),
    RewriteRule("Has", "{subject} {verb} {body}", "{subject} {verb} not {body}"),
    RewriteRule("Can", "{subject} can {body}", "{subject} cannot {body}"),
    RewriteRule("Will", "{subject} will {body}", "{subject} will not {body}"),
    RewriteRule("Would", "{subject} would {body}", "{subject} would not {body}"),
    RewriteRule("Should", "{subject} should {body}", "{subject} should not {body}"),
]

_PRONOUN_FLIPS = {
    "you": "I",
    "your": "my",
    "yours": "mine",
    "yourself": "myself",
}


def _flip_pronouns(words: list[str]) -> list[str]:
    return [_PRONOUN_FLIPS.get(w.lower(), w) for w in words]


def _answer_polarity(answer: str) -> str | None:
    first = re.split(r"[\s,.!]+", answer.strip())
    if not first or not first[0]:
        return None
    head = first[0].lower()
    if head == "yes":
        return "yes"
    if head == "no":
        return "no"
    return None


def _conjugate(auxiliary: str, subject: str) -> str:
    forms = _BE_FORMS.get(auxiliary.lower(), {})
    return forms.get(subject.lower(), auxiliary.lower())


def rewrite_qa(question: str, answer: str,
               rules: list[RewriteRule] | None = None) -> str:
    """Rewrite one (question, answer) turn into a declarative sentence.

    Raises UntransformableError when no rule matches the leading auxiliary
    or the answer has no yes/no polarity.
    """
    if not question.strip():
        raise ValueError("empty question")
    rules = DEFAULT_RULES if rules is None else rules

    polarity = _answer_polarity(answer)
    if polarity is None:
        raise UntransformableError(f"answer {answer!r} has no yes/no polarity")

    words = question.strip().rstrip("?").strip().split()
    if not words:
        raise UntransformableError("question has no words before '?'")
    aux = words[0]
    rule = next((r for r in rules if r.auxiliary.lower() == aux.lower()), None)
    if rule is None:
        raise UntransformableError(f"no rule for auxiliary {aux!r}")

    rest = _flip_pronouns(words[1:])
    if not rest:
        raise UntransformableError("question has no subject after the auxiliary")
    # subject = first token, extended through determiners/possessives so
    # "my home" or "the child" stays together as the subject phrase
    determiners = {"the", "a", "an", "my", "his", "her", "their", "our",
                   "its", "this", "that"}
    cut = 1
    while cut < len(rest) and rest[cut - 1].lower() in determiners:
        cut += 1
    subject = " ".join(rest[:cut])
    body = " ".join(rest[cut:])

    template = rule.affirmative_template if polarity == "yes" else rule.negative_template
    sentence = template.format(
        subject=subject,
        verb=_conjugate(rule.auxiliary, subject),
        body=body,
    )
    sentence = re.sub(r"\s+", " ", sentence).strip()
    sentence = sentence[0].upper() + sentence[1:]
    return sentence + "."
