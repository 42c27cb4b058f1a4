#!/usr/bin/env python
"""Regenerate the bundled toy corpora for the built-in text classifiers.

Writes src/ragate/data/qtype_toy.tsv and complexity_toy.tsv. The rows are
templated questions, enough for the hashed-ngram softmax models to pick up
the surface cues that distinguish the classes (ordinal words, "how many",
"than", nested of-phrases, ...). Purely deterministic; rerunning produces
byte-identical files.
"""

from __future__ import annotations

import os

COUNTRIES = ["the united states", "france", "brazil", "japan", "kenya", "canada"]
PEOPLE = ["marie curie", "nikola tesla", "frida kahlo", "alan turing", "ada lovelace", "miles davis"]
BOOKS = ["moby dick", "the great gatsby", "one hundred years of solitude", "beloved", "dune", "middlemarch"]
FILMS = ["casablanca", "seven samurai", "the godfather", "spirited away", "metropolis", "vertigo"]
BANDS = ["the beatles", "queen", "radiohead"]
PLANETS = ["mars", "jupiter", "saturn", "neptune", "venus", "mercury"]
LANDMARKS = ["the eiffel tower", "machu picchu", "the taj mahal", "angkor wat", "petra", "stonehenge"]
CITIES = ["paris", "tokyo", "nairobi", "lima", "oslo", "seoul"]
RIVER_PLACES = ["europe", "south america", "asia", "africa", "australia", "north america"]
PAIRS = [
    ("a virus", "a bacterium"),
    ("weather", "climate"),
    ("an alligator", "a crocodile"),
    ("fission", "fusion"),
    ("a comet", "an asteroid"),
    ("speed", "velocity"),
]
THING_PAIRS = [
    ("the pacific ocean", "the atlantic ocean"),
    ("mount everest", "k2"),
    ("the nile", "the amazon"),
    ("jupiter", "saturn"),
    ("a blue whale", "an elephant"),
    ("the sun", "sirius"),
]


def qtype_rows() -> list[tuple[str, str]]:
    rows: list[tuple[str, str]] = []

    for ordinal in ["first", "second", "third", "fourth"]:
        for country in COUNTRIES[:3]:
            rows.append(("ordinal", f"who was the {ordinal} president of {country}"))
    for ordinal in ["first", "second", "third", "fourth", "fifth", "sixth"]:
        rows.append(("ordinal", f"what is the {ordinal} planet from the sun"))
    for ordinal in ["first", "second"]:
        for band in BANDS:
            rows.append(("ordinal", f"what was the {ordinal} album released by {band}"))

    for planet in PLANETS:
        rows.append(("count", f"how many moons does {planet} have"))
    for country in COUNTRIES:
        rows.append(("count", f"how many official languages does {country} have"))
    for sport in ["soccer", "baseball", "cricket", "hockey", "basketball", "volleyball"]:
        rows.append(("count", f"how many players are on a {sport} team"))
    for person in PEOPLE:
        rows.append(("count", f"how many patents did {person} hold"))

    for book in BOOKS:
        rows.append(("generic", f"who wrote {book}"))
    for country in COUNTRIES:
        rows.append(("generic", f"what is the capital of {country}"))
    for person in PEOPLE:
        rows.append(("generic", f"when was {person} born"))
    for landmark in LANDMARKS:
        rows.append(("generic", f"where is {landmark} located"))

    for place in RIVER_PLACES:
        rows.append(("superlative", f"what is the longest river in {place}"))
    for place in RIVER_PLACES:
        rows.append(("superlative", f"what is the largest country in {place}"))
    for role in ["president", "prime minister", "senator"]:
        rows.append(("superlative", f"who was the youngest {role} ever elected"))
    for metric in ["population", "coastline", "literacy rate"]:
        rows.append(("superlative", f"which country has the highest {metric}"))
    for thing in ["mountain", "desert", "lake", "city", "island", "volcano"]:
        rows.append(("superlative", f"what is the biggest {thing} on earth"))

    for a, b in PAIRS:
        rows.append(("difference", f"what is the difference between {a} and {b}"))
    for a, b in PAIRS:
        rows.append(("difference", f"how does {a} differ from {b}"))
    for a, b in PAIRS:
        rows.append(("difference", f"what distinguishes {a} from {b}"))

    for f1, f2 in zip(FILMS, FILMS[1:] + FILMS[:1]):
        rows.append(("intersection", f"which actors appeared in both {f1} and {f2}"))
    for p1, p2 in zip(PEOPLE, PEOPLE[1:] + PEOPLE[:1]):
        rows.append(("intersection", f"which awards were won by both {p1} and {p2}"))
    for c1, c2 in zip(COUNTRIES, COUNTRIES[1:] + COUNTRIES[:1]):
        rows.append(("intersection", f"which organizations count both {c1} and {c2} as members"))
    for city1, city2 in zip(CITIES, CITIES[1:] + CITIES[:1]):
        rows.append(("intersection", f"which airlines fly to both {city1} and {city2}"))

    for film in FILMS:
        rows.append(("multihop", f"who is the spouse of the director of {film}"))
    for book in BOOKS:
        rows.append(("multihop", f"in which country was the author of {book} born"))
    for landmark in LANDMARKS:
        rows.append(("multihop", f"what is the capital of the country where {landmark} is located"))
    for person in PEOPLE:
        rows.append(("multihop", f"what did the mentor of {person} study"))

    for adj in ["bigger", "older"]:
        for a, b in THING_PAIRS:
            rows.append(("comparative", f"which is {adj}, {a} or {b}"))
    for a, b in THING_PAIRS:
        rows.append(("comparative", f"is {a} heavier than {b}"))
    for a, b in THING_PAIRS:
        rows.append(("comparative", f"does {a} weigh more than {b}"))

    for person in PEOPLE:
        rows.append(("yesno", f"did {person} ever win a nobel prize"))
    for city, country in zip(CITIES, COUNTRIES):
        rows.append(("yesno", f"is {city} the capital of {country}"))
    for film in FILMS:
        rows.append(("yesno", f"was {film} released before 1980"))
    for c1, c2 in zip(COUNTRIES, COUNTRIES[2:] + COUNTRIES[:2]):
        rows.append(("yesno", f"does {c1} share a border with {c2}"))

    return rows


def complexity_rows() -> list[tuple[str, str]]:
    rows: list[tuple[str, str]] = []

    for country in COUNTRIES:
        rows.append(("onehop", f"what is the capital of {country}"))
    for person in PEOPLE:
        rows.append(("onehop", f"when was {person} born"))
    for book in BOOKS:
        rows.append(("onehop", f"who wrote {book}"))
    for film in FILMS:
        rows.append(("onehop", f"who directed {film}"))
    for planet in PLANETS:
        rows.append(("onehop", f"how far is {planet} from the sun"))
    for landmark in LANDMARKS:
        rows.append(("onehop", f"when was {landmark} built"))
    for city in CITIES:
        rows.append(("onehop", f"what is the population of {city}"))
    for person in PEOPLE:
        rows.append(("onehop", f"where did {person} die"))
    for country in COUNTRIES:
        rows.append(("onehop", f"what currency is used in {country}"))
    for band in BANDS:
        rows.append(("onehop", f"when did {band} form"))
    rows.append(("onehop", "how tall is mount everest"))
    rows.append(("onehop", "what color is a ruby"))
    rows.append(("onehop", "who painted the mona lisa"))

    for film in FILMS:
        rows.append(("multihop", f"who is the spouse of the director of {film}"))
    for book in BOOKS:
        rows.append(("multihop", f"in which city was the author of {book} born"))
    for landmark in LANDMARKS:
        rows.append(("multihop", f"what is the population of the country where {landmark} stands"))
    for person in PEOPLE:
        rows.append(("multihop", f"who taught the doctoral advisor of {person}"))
    for country in COUNTRIES:
        rows.append(("multihop", f"what river flows through the capital of {country}"))
    for city in CITIES:
        rows.append(("multihop", f"who founded the oldest university in {city}"))
    for band in BANDS:
        rows.append(("multihop", f"what label released the first album by {band}"))
    for planet in PLANETS:
        rows.append(("multihop", f"who discovered the largest moon of {planet}"))
    for person in PEOPLE[:3]:
        rows.append(("multihop", f"which award did the spouse of {person} receive"))

    return rows


def write_corpus(path: str, rows: list[tuple[str, str]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# generated by scripts/build_toy_corpora.py -- do not edit by hand\n")
        fh.write("label\ttext\n")
        for label, text in rows:
            fh.write(f"{label}\t{text}\n")


def main() -> None:
    data_dir = os.path.join(os.path.dirname(__file__), "..", "src", "ragate", "data")
    qtype = qtype_rows()
    complexity = complexity_rows()
    write_corpus(os.path.join(data_dir, "qtype_toy.tsv"), qtype)
    write_corpus(os.path.join(data_dir, "complexity_toy.tsv"), complexity)
    print(f"qtype_toy.tsv: {len(qtype)} rows")
    print(f"complexity_toy.tsv: {len(complexity)} rows")


if __name__ == "__main__":
    main()
