"""Synthetic source-dialogue generator.

Twelve eligibility-check tasks, each with a fixed knowledge snippet and an
ordered list of condition questions drawn from the rule table's
auxiliaries. A dialogue asks conditions in order until the user answers
"No" (final answer "No") or all conditions pass ("Yes"). A fraction of
dialogues carry an off-topic request and are answered "Irrelevant" with
no clarification turns.
"""

from __future__ import annotations

import random

from .types import SourceDialogue

# (task name, request templates, condition questions in ask order)
TASKS = [
    ("farm grant",
     ["Can I get the farm grant ?", "I want the farm grant", "Am I eligible for the farm grant ?"],
     ["Are you a family farmer", "Do you own farm land", "Have you filed a farm tax return", "Will you plant crops this year"]),
    ("housing benefit",
     ["Can I claim housing benefit ?", "I need housing benefit now", "Do I qualify for housing benefit ?"],
     ["Do you rent your home", "Are you on a low income", "Have you claimed housing support before", "Can you provide a tenancy agreement"]),
    ("student loan",
     ["Can I take a student loan ?", "I want a student loan", "Am I able to get a student loan ?"],
     ["Are you enrolled at a university", "Do you study full time", "Have you repaid earlier loans", "Will you finish your course"]),
    ("travel visa",
     ["Can I apply for a travel visa ?", "I need a travel visa", "Do I qualify for a travel visa ?"],
     ["Do you hold a valid passport", "Have you booked a return ticket", "Are you visiting for tourism", "Can you show bank statements"]),
    ("pension credit",
     ["Can I get pension credit ?", "I want to claim pension credit", "Am I entitled to pension credit ?"],
     ["Have you reached pension age", "Do you live in the country", "Are you receiving other benefits", "Did you pay insurance contributions"]),
    ("child support",
     ["Can I receive child support ?", "I need child support payments", "Do I qualify for child support ?"],
     ["Do you care for a child", "Is the child under sixteen", "Are you the main carer", "Does the child live with you"]),
    ("disability allowance",
     ["Can I claim disability allowance ?", "I want disability allowance", "Am I eligible for disability allowance ?"],
     ["Do you have a long term condition", "Does the condition limit daily tasks", "Have you seen a doctor recently", "Can you supply medical records"]),
    ("small business loan",
     ["Can I obtain a small business loan ?", "I want a small business loan", "Do I qualify for a small business loan ?"],
     ["Do you run a registered business", "Is the business two years old", "Have you kept trading accounts", "Will you employ local staff"]),
    ("energy rebate",
     ["Can I get the energy rebate ?", "I want the energy rebate", "Am I due the energy rebate ?"],
     ["Do you pay the energy bill", "Is your meter a smart meter", "Are you the named account holder", "Did you apply last winter"]),
    ("job seeker support",
     ["Can I claim job seeker support ?", "I need job seeker support", "Do I qualify for job seeker support ?"],
     ["Are you currently unemployed", "Can you start work soon", "Have you registered at the job centre", "Do you attend weekly meetings"]),
    ("council tax discount",
     ["Can I get a council tax discount ?", "I want a council tax discount", "Am I eligible for a council tax discount ?"],
     ["Do you live alone", "Is the property your main home", "Are you a full time student", "Has the council billed you directly"]),
    ("health card",
     ["Can I renew my health card ?", "I want a new health card", "Do I qualify for a health card ?"],
     ["Are you registered with a clinic", "Do you hold citizenship papers", "Has your old card expired", "Were you issued a card before"]),
]

OFFTOPIC_REQUESTS = [
    "What time is the next train ?",
    "Where can I park my car ?",
    "How do I reset my password ?",
    "When does the library open ?",
]


def generate_source_dialogues(n: int, seed: int,
                              irrelevant_fraction: float = 0.1) -> list[SourceDialogue]:
    rng = random.Random(seed)
    dialogues = []
    for i in range(n):
        task_name, requests, conditions = TASKS[rng.randrange(len(TASKS))]
        knowledge = f"The {task_name} requires that " + " and ".join(
            q.lower() for q in conditions
        ) + " ."
        if rng.random() < irrelevant_fraction:
            dialogues.append(SourceDialogue(
                id=f"syn-{i:05d}",
                knowledge=knowledge,
                request=rng.choice(OFFTOPIC_REQUESTS),
                turns=[],
                final_answer="Irrelevant",
            ))
            continue
        request = rng.choice(requests)
        turns: list[tuple[str, str]] = []
        final = "Yes"
        for q in conditions:
            if rng.random() < 0.25:
                turns.append((q + " ?", "No"))
                final = "No"
                break
            turns.append((q + " ?", "Yes"))
        dialogues.append(SourceDialogue(
            id=f"syn-{i:05d}",
            knowledge=knowledge,
            request=request,
            turns=turns,
            final_answer=final,
        ))
    return dialogues


def write_source_jsonl(dialogues: list[SourceDialogue], path) -> None:
    import json
    with open(path, "w", encoding="utf-8") as f:
        for d in dialogues:
            f.write(json.dumps({
                "id": d.id,
                "knowledge": d.knowledge,
                "request": d.request,
                "turns": [list(t) for t in d.turns],
                "final_answer": d.final_answer,
            }, ensure_ascii=False) + "\n")
