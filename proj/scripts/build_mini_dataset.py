#!/usr/bin/env python3
# Copyright 2026 The Probe Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Writes the bundled mini-dataset and its mock resources into data/mini/.

Everything is deterministic: rerunning the script reproduces the files byte
for byte. Relation labels are copied verbatim from the Wikidata property
table the dataset is modelled on, including the "Location of information"
label for P740.
"""
import json
import pathlib
import random

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "mini"

RELATIONS = [
    ("P17", "Country", "Which country is {subject} located in?"),
    ("P19", "Place of birth", "Where was {subject} born?"),
    ("P20", "Place of death", "Where did {subject} die?"),
    ("P27", "Country of citizenship", "Which country is {subject} a citizen of?"),
    ("P30", "Continent", "What continent is {subject} located on?"),
    ("P36", "Capital", "What is the capital of {subject}?"),
    ("P37", "Official language", "What is the official language of {subject}?"),
    ("P50", "Author", "Who is the author of {subject}?"),
    ("P69", "Educated at", "Where was {subject} educated?"),
    ("P103", "Native language", "What is the native language of {subject}?"),
    ("P119", "Place of burial", "Where is {subject} buried?"),
    ("P131", "Located in the administrative territorial entity",
     "In which administrative region is {subject} located?"),
    ("P140", "Religion or worldview", "What is the religion of {subject}?"),
    ("P155", "Follows", "What comes before {subject}?"),
    ("P156", "Followed by", "What comes after {subject}?"),
    ("P159", "Headquarters location", "Where is the headquarters of {subject}?"),
    ("P407", "Language of work or name", "In which language is {subject} written?"),
    ("P495", "Country of origin", "What is the country of origin of {subject}?"),
    ("P641", "Sport", "Which sport does {subject} play?"),
    ("P740", "Location of information", "Where was {subject} founded?"),
    ("P937", "Work location", "Where did {subject} work?"),
    ("P1365", "Replaces", "What did {subject} replace?"),
    ("P1366", "Replaced by", "What replaced {subject}?"),
    ("P1376", "Capital of", "What is {subject} the capital of?"),
    ("P1412", "Languages spoken, written, or signed", "Which language does {subject} speak?"),
]

FACTS = {
    "P17": [("Eiffel Tower", "France"), ("Colosseum", "Italy"), ("Machu Picchu", "Peru"),
            ("Mount Kilimanjaro", "Tanzania")],
    "P19": [("Johann Sebastian Bach", "Eisenach"), ("Wolfgang Amadeus Mozart", "Salzburg"),
            ("Frida Kahlo", "Coyoacán"), ("Pablo Picasso", "Málaga")],
    "P20": [("Albert Einstein", "Princeton"), ("Vincent van Gogh", "Auvers-sur-Oise"),
            ("Frédéric Chopin", "Paris"), ("Charles Darwin", "Downe")],
    "P27": [("Angela Merkel", "Germany"), ("Nelson Mandela", "South Africa"),
            ("Akira Kurosawa", "Japan"), ("Gabriel García Márquez", "Colombia")],
    "P30": [("Para District", "South America"), ("Kenya", "Africa"), ("Mongolia", "Asia"),
            ("Portugal", "Europe")],
    "P36": [("Australia", "Canberra"), ("Canada", "Ottawa"), ("Japan", "Tokyo"),
            ("Norway", "Oslo")],
    "P37": [("Brazil", "Portuguese"), ("Austria", "German"), ("Iran", "Persian"),
            ("Egypt", "Arabic")],
    "P50": [("Hamlet", "William Shakespeare"), ("Frankenstein", "Mary Shelley"),
            ("Dracula", "Bram Stoker"), ("Nineteen Eighty-Four", "George Orwell")],
    "P69": [("Alan Turing", "Princeton University"), ("Marie Curie", "University of Paris"),
            ("Niels Bohr", "University of Copenhagen"),
            ("Enrico Fermi", "Scuola Normale Superiore di Pisa")],
    "P103": [("Leo Tolstoy", "Russian"), ("Dante Alighieri", "Italian"),
             ("Miguel de Cervantes", "Spanish"), ("Victor Hugo", "French")],
    "P119": [("Hans-Georg Gadamer", "Heidelberg"), ("William Shakespeare", "Stratford-upon-Avon"),
             ("Karl Marx", "Highgate Cemetery"), ("Ludwig van Beethoven", "Zentralfriedhof")],
    "P131": [("Golden Gate Bridge", "San Francisco"), ("Times Square", "Manhattan"),
             ("Alhambra", "Granada"), ("Hollywood", "Los Angeles")],
    "P140": [("Pope Francis", "Catholic Church"), ("Mahatma Gandhi", "Hinduism"),
             ("Tenzin Gyatso", "Tibetan Buddhism"), ("Martin Luther King Jr.", "Baptists")],
    "P155": [("Tuesday", "Monday"), ("February", "January"), ("Windows Vista", "Windows XP"),
             ("iPhone 4", "iPhone 3GS")],
    "P156": [("Monday", "Tuesday"), ("Windows XP", "Windows Vista"), ("Bronze Age", "Iron Age"),
             ("Pentium", "Pentium II")],
    "P159": [("Microsoft", "Redmond"), ("Nintendo", "Kyoto"), ("Volkswagen", "Wolfsburg"),
             ("Nestlé", "Vevey")],
    "P407": [("Don Quixote", "Spanish"), ("Faust", "German"), ("Madame Bovary", "French"),
             ("Divine Comedy", "Italian")],
    "P495": [("Sushi", "Japan"), ("Flamenco", "Spain"), ("Tango", "Argentina"),
             ("Haggis", "Scotland")],
    "P641": [("Lionel Messi", "association football"), ("Roger Federer", "tennis"),
             ("Tiger Woods", "golf"), ("Michael Jordan", "basketball")],
    "P740": [("ABBA", "Stockholm"), ("Metallica", "Los Angeles"), ("Rammstein", "Berlin"),
             ("Radiohead", "Abingdon")],
    "P937": [("Sigmund Freud", "Vienna"), ("Galileo Galilei", "Padua"), ("Rembrandt", "Amsterdam"),
             ("Andy Warhol", "New York City")],
    "P1365": [("Euro", "European Currency Unit"), ("Gregorian calendar", "Julian calendar"),
              ("Windows 7", "Windows Vista"), ("PlayStation 2", "PlayStation")],
    "P1366": [("Julian calendar", "Gregorian calendar"), ("Deutsche Mark", "Euro"),
              ("PlayStation", "PlayStation 2"), ("Netscape Navigator", "Mozilla Firefox")],
    "P1376": [("Canberra", "Australia"), ("Ottawa", "Canada"), ("Nairobi", "Kenya"),
              ("Lima", "Peru")],
    "P1412": [("Emmanuel Macron", "French"), ("Shakira", "Spanish"),
              ("Xi Jinping", "Mandarin Chinese"), ("Pelé", "Portuguese")],
}

# Thesaurus-style synonyms for the content words of the templates.
LEXICON = {
    "administrative": ["managerial", "executive", "governmental", "bureaucratic"],
    "author": ["writer", "generator", "creator", "source"],
    "born": ["delivered", "birthed", "bred", "whelped"],
    "buried": ["inhumed", "interred", "entombed", "inhume"],
    "capital": ["seat", "metropolis", "center", "city"],
    "citizen": ["national", "denizen", "resident", "inhabitant"],
    "comes": ["arrives", "goes", "follows", "occurs"],
    "continent": ["landmass", "mainland", "land", "continental"],
    "country": ["nation", "state", "land", "commonwealth"],
    "die": ["perish", "decease", "expire", "pass"],
    "educated": ["schooled", "trained", "taught", "instructed"],
    "founded": ["established", "instituted", "constituted", "created"],
    "headquarters": ["HQ", "base", "office", "command"],
    "language": ["tongue", "speech", "lingua", "idiom"],
    "located": ["situated", "placed", "set", "sited"],
    "native": ["indigenous", "aboriginal", "mother", "autochthonous"],
    "official": ["formal", "authorized", "sanctioned", "prescribed"],
    "origin": ["source", "provenance", "root", "beginning"],
    "play": ["compete", "practice", "perform", "engage"],
    "region": ["area", "territory", "district", "zone"],
    "religion": ["faith", "creed", "church", "worship"],
    "replace": ["supplant", "supersede", "substitute", "displace"],
    "replaced": ["superseded", "supplanted", "displaced", "substituted"],
    "speak": ["talk", "utter", "verbalize", "mouth"],
    "sport": ["athletics", "game", "competition", "recreation"],
    "work": ["labor", "toil", "serve", "operate"],
    "written": ["composed", "authored", "penned", "scripted"],
}

# Embedding clusters: every word in a cluster sits near the cluster centre.
EMBEDDING_CLUSTERS = [
    ["where", "accordingly", "consequently", "wherever", "whereabouts"],
    ["what", "whatever", "something", "anything"],
    ["which", "whichever", "whatsoever", "that"],
    ["who", "whoever", "someone", "somebody"],
    ["is", "poses", "represents", "becomes"],
] + [[word] + syns for word, syns in sorted(LEXICON.items())]

# English stopwords. Question words are deliberately absent: removing them
# would destroy the question itself.
STOPWORDS = """a about above after again against all am an and any are aren't as at be
because been before being below between both but by can can't cannot could couldn't did
didn't do does doesn't doing don't down during each few for from further had hadn't has
hasn't have haven't having he he'd he'll he's her here here's hers herself him himself his
i i'd i'll i'm i've if in into isn't is it it's its itself let's me more most mustn't my
myself no nor not of off on once only or other ought our ours ourselves out over own same
shan't she she'd she'll she's should shouldn't so some such than that's the their theirs
them themselves then there there's these they they'd they'll they're they've this those
through to too under until up very was wasn't we we'd we'll we're we've were weren't won't
would wouldn't you you'd you'll you're you've your yours yourself yourselves""".split()


def write_json(path, obj):
    path.write_text(json.dumps(obj, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    labels = {rid: label for rid, label, _ in RELATIONS}
    write_json(OUT / "templates.json", {rid: tmpl for rid, _, tmpl in RELATIONS})

    lines = []
    subjects = set()
    for rid, _, _ in RELATIONS:
        for subject, obj in FACTS[rid]:
            assert subject not in subjects, subject
            subjects.add(subject)
            rec = {"subject": subject, "relation_id": rid, "relation_label": labels[rid],
                   "gold_object": obj}
            lines.append(json.dumps(rec, ensure_ascii=False))
    (OUT / "facts.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")

    write_json(OUT / "lexicon.json", LEXICON)
    (OUT / "stopwords.txt").write_text(
        "# English stopword list, v1. One word per line.\n" + "\n".join(sorted(set(STOPWORDS))) + "\n",
        encoding="utf-8")

    rng = random.Random(20230417)
    dim = 16
    rows = {}
    for cluster in EMBEDDING_CLUSTERS:
        centre = [rng.gauss(0.0, 1.0) for _ in range(dim)]
        for word in cluster:
            if word in rows:
                continue
            rows[word] = [c + rng.gauss(0.0, 0.35) for c in centre]
    with open(OUT / "embeddings.txt", "w", encoding="utf-8") as f:
        for word in sorted(rows):
            f.write(word + " " + " ".join(f"{v:.6f}" for v in rows[word]) + "\n")

    # Generation mock: each subject answers from its own small beam. Gold is
    # usually the favourite; every fourth fact favours a distractor instead.
    rules = []
    index = 0
    for rid, _, _ in RELATIONS:
        golds = [o for _, o in FACTS[rid]]
        for k, (subject, obj) in enumerate(FACTS[rid]):
            distractors = [g for g in golds if g != obj]
            distractors = distractors[k % 3:] + distractors[:k % 3]
            if index % 4 == 3:
                probs = [0.25, 0.4, 0.15, 0.05]
            else:
                probs = [0.4, 0.3, 0.15, 0.05]
            cands = [[obj, probs[0]]] + [[d, p] for d, p in zip(distractors, probs[1:])]
            rules.append({"subject": subject, "candidates": cands})
            index += 1
    write_json(OUT / "mock_generation.json", {"exact": {}, "subject_rules": rules})
    write_json(OUT / "mock_translation.json",
               {"synthetic": True, "languages": ["de", "en", "es", "fr", "ja", "ru"], "exact": []})

    config = {
        "facts_path": "facts.jsonl",
        "templates_path": "templates.json",
        "generation": {"name": "mock-generator", "endpoint": "mock",
                       "mock_table": "mock_generation.json"},
        "translation": {"name": "mock-translator", "endpoint": "mock",
                        "mock_table": "mock_translation.json"},
        "resources": {"lexicon": "lexicon.json", "embeddings": "embeddings.txt",
                      "stopwords": "stopwords.txt"},
        "augmentation": {"fan_out": 8, "source_language": "en", "stopword_filter": True},
        "strategy": "sum",
        "k_values": [1, 2, 5, 10, 20, 30],
        "iterations": 5,
        "seed": 0,
        "num_sequences": 10,
        "case_insensitive": False,
        "output_dir": "probe-out",
    }
    write_json(OUT / "config.json", config)
    no_mt = dict(config)
    del no_mt["translation"]
    write_json(OUT / "config_no_translation.json", no_mt)


if __name__ == "__main__":
    main()
