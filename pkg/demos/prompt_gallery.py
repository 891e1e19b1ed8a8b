#!/usr/bin/env python3
"""Show how the four prompt variants build on one another.

For one sample text chunk, render every variant, then show that each step
up the ladder only adds instruction clauses — it never rewrites or drops
the ones below it. Run with:

    python3 demos/prompt_gallery.py
"""

from __future__ import annotations

from triplex.prompting import (
    PromptTemplates,
    PromptVariant,
    build_prompt,
    default_example_bank,
    validate_bank,
)

CHUNK = (
    "Australia and Korea shall eliminate customs duties on originating goods "
    "in accordance with the Schedule. Korea reduces import tariffs on beef "
    "products from Australia over a period of fifteen years."
)


def main() -> None:
    bank = default_example_bank()
    templates = PromptTemplates.default()

    print("=" * 72)
    print("The four prompt variants, weakest to strongest")
    print("=" * 72)

    for variant in PromptVariant:
        deficiencies = validate_bank(bank, variant)
        rendered = build_prompt(variant, bank, CHUNK, templates)
        clauses = templates.constraint_clauses(variant)
        print(f"\n--- {variant.value} " + "-" * (60 - len(variant.value)))
        print(f"bank check:          {'ok' if not deficiencies else deficiencies}")
        print(f"instruction clauses: {len(clauses)}")
        print(f"rendered size:       {len(rendered.text)} characters")
        print(f"clause fingerprint:  {rendered.constraint_fingerprint[:16]}…")
        head = rendered.text.splitlines()[:4]
        for line in head:
            print(f"    | {line}")
        print("    | …")

    print("\n" + "=" * 72)
    print("What each step adds (clause accretion)")
    print("=" * 72)
    ladder = list(PromptVariant)
    previous: set[str] = set()
    for variant in ladder:
        clauses = set(templates.constraint_clauses(variant))
        added = sorted(clauses - previous)
        print(f"\n{variant.value} adds {len(added)} clause(s):")
        for clause in added:
            text = clause if len(clause) <= 88 else clause[:85] + "…"
            print(f"  + {text}")
        assert previous < clauses, "each variant must strictly extend the last"
        previous = clauses

    print("\nEvery earlier clause survives verbatim at every later rung.")


if __name__ == "__main__":
    main()
