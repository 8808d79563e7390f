#!/usr/bin/env python3
"""Regenerate the bundled mini fixture under src/fluentqa/data/mini_sg/.

The fixture is a small hand-curated set of factoid questions with
constituency parses, answer phrases, five synthetic annotators'
best-response picks, and a declarative-sentence corpus for training the toy
language models.  Gold responses are written as expected surface strings and
verified against the generator's actual candidate set, so the frozen
annotation file always references real candidates.

Annotator personas:
  a1, a2, a3    always pick the full fluent response (complete subject,
                correct preposition); on "noisy" questions a3 instead picks
                a unique near-miss variant (off-by-one preposition)
  a4, a5        likewise pick the full response, except on "lazy" questions
                where both just take the bare answer phrase (the shortest
                entry), and on a few questions a5 picks another unique
                near-miss

The corpus is written so that correct prepositions for the fixture's answer
phrases are attested (the linear rankers' only lexical preposition signal is
the language-model features) while the question subjects stay out of
vocabulary (so a fluency-only ranker drifts to pronoun variants, which no
annotator selected).
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from fluentqa import stgen, treebank

OUT_DIR = Path(__file__).resolve().parents[1] / "src" / "fluentqa" / "data" / "mini_sg"

# id, tree, answer, gold fluent response
QUESTIONS = [
    ("q001",
     "(ROOT (SBARQ (WHNP (WDT what) (NN year)) (SQ (VBD did) (NP (DT the) (NNPS Netherlands)) (VP (VB rise) (PRT (RP up)) (PP (IN against) (NP (NNP Philip) (NNP II))))) (. ?)))",
     "1568",
     "the Netherlands rose up against Philip II in 1568"),
    ("q002",
     "(ROOT (SBARQ (WHADVP (WRB when)) (SQ (VBD did) (NP (DT the) (NN war)) (VP (VB end))) (. ?)))",
     "1945",
     "the war ended in 1945"),
    ("q003",
     "(ROOT (SBARQ (WHNP (WDT what) (NN year)) (SQ (VBD did) (NP (NNP Columbus)) (VP (VB sail) (PP (TO to) (NP (NNP America))))) (. ?)))",
     "1492",
     "Columbus sailed to America in 1492"),
    ("q004",
     "(ROOT (SBARQ (WHADVP (WRB where)) (SQ (VBD did) (NP (DT the) (NNPS Pilgrims)) (VP (VB land))) (. ?)))",
     "Plymouth",
     "the Pilgrims landed at Plymouth"),
    ("q005",
     "(ROOT (SBARQ (WHADVP (WRB when)) (SQ (VBD did) (NP (NNP Mozart)) (VP (VB die))) (. ?)))",
     "1791",
     "Mozart died in 1791"),
    ("q006",
     "(ROOT (SBARQ (WHNP (WP what)) (SQ (VBD did) (NP (NNP Marie) (NNP Curie)) (VP (VB win))) (. ?)))",
     "the Nobel Prize",
     "Marie Curie won the Nobel Prize"),
    ("q007",
     "(ROOT (SBARQ (WHNP (WP what)) (SQ (VBD did) (NP (NNP Leonardo)) (VP (VB paint))) (. ?)))",
     "the Mona Lisa",
     "Leonardo painted the Mona Lisa"),
    ("q008",
     "(ROOT (SBARQ (WHADVP (WRB where)) (SQ (VBD did) (NP (DT the) (NNPS Vikings)) (VP (VB come) (PP (IN from)))) (. ?)))",
     "Scandinavia",
     "the Vikings came from Scandinavia"),
    ("q009",
     "(ROOT (SBARQ (WHADVP (WRB when)) (SQ (VBD did) (NP (DT the) (NNP Berlin) (NNP Wall)) (VP (VB fall))) (. ?)))",
     "1989",
     "the Berlin Wall fell in 1989"),
    ("q010",
     "(ROOT (SBARQ (WHNP (WDT what) (NN year)) (SQ (VBD did) (NP (NNP Texas)) (VP (VB join) (NP (DT the) (NN union)))) (. ?)))",
     "1845",
     "Texas joined the union in 1845"),
    ("q011",
     "(ROOT (SBARQ (WHADVP (WRB where)) (SQ (VBD did) (NP (NNP Napoleon)) (VP (VB lose) (NP (PRP$ his) (JJ final) (NN battle)))) (. ?)))",
     "Waterloo",
     "Napoleon lost his final battle at Waterloo"),
    ("q012",
     "(ROOT (SBARQ (WHADVP (WRB when)) (SQ (VBD did) (NP (NNP Alaska)) (VP (VB become) (NP (DT a) (NN state)))) (. ?)))",
     "1959",
     "Alaska became a state in 1959"),
    ("q013",
     "(ROOT (SBARQ (WHADVP (WRB where)) (SQ (VBZ does) (NP (DT the) (NNP Nile)) (VP (VB flow))) (. ?)))",
     "the Mediterranean",
     "the Nile flows to the Mediterranean"),
    ("q014",
     "(ROOT (SBARQ (WHADVP (WRB where)) (SQ (VBP do) (NP (NNS kangaroos)) (VP (VB live))) (. ?)))",
     "Australia",
     "kangaroos live in Australia"),
    ("q015",
     "(ROOT (SBARQ (WHNP (WP what)) (SQ (VBZ does) (NP (DT a) (NN caterpillar)) (VP (VB become))) (. ?)))",
     "a butterfly",
     "a caterpillar becomes a butterfly"),
    ("q016",
     "(ROOT (SBARQ (WHADVP (WRB where)) (SQ (VBZ does) (NP (DT the) (NN sun)) (VP (VB rise))) (. ?)))",
     "the east",
     "the sun rises in the east"),
    ("q017",
     "(ROOT (SBARQ (WHADVP (WRB where)) (SQ (MD can) (NP (NNS pandas)) (VP (VB survive))) (. ?)))",
     "bamboo forests",
     "pandas can survive in bamboo forests"),
    ("q018",
     "(ROOT (SBARQ (WHADVP (WRB when)) (SQ (MD will) (NP (DT the) (NN comet)) (VP (VB return))) (. ?)))",
     "2061",
     "the comet will return in 2061"),
    ("q019",
     "(ROOT (SBARQ (WHADVP (WRB where)) (SQ (VBZ is) (NP (DT the) (NNP Eiffel) (NNP Tower))) (. ?)))",
     "Paris",
     "the Eiffel Tower is in Paris"),
    ("q020",
     "(ROOT (SBARQ (WHNP (WP what)) (SQ (VBZ is) (NP (NP (DT the) (NN capital)) (PP (IN of) (NP (NNP France))))) (. ?)))",
     "Paris",
     "the capital of France is Paris"),
    ("q021",
     "(ROOT (SBARQ (WHNP (WP who)) (SQ (VBD was) (NP (NP (DT the) (JJ first) (NN president)) (PP (IN of) (NP (DT the) (NNP United) (NNPS States))))) (. ?)))",
     "George Washington",
     "the first president of the United States was George Washington"),
    ("q022",
     "(ROOT (SBARQ (WHNP (WP what)) (SQ (VBZ is) (NP (DT the) (JJS largest) (NN planet))) (. ?)))",
     "Jupiter",
     "the largest planet is Jupiter"),
    ("q023",
     "(ROOT (SBARQ (WHADVP (WRB where)) (SQ (VBP are) (NP (DT the) (NNS pyramids))) (. ?)))",
     "Egypt",
     "the pyramids are in Egypt"),
    ("q024",
     "(ROOT (SBARQ (WHADVP (WRB when)) (SQ (VBD was) (NP (NP (DT the) (NN battle)) (PP (IN of) (NP (NNP Hastings))))) (. ?)))",
     "1066",
     "the battle of Hastings was in 1066"),
    ("q025",
     "(ROOT (SBARQ (WHADVP (WRB when)) (SQ (VBD was) (NP (DT the) (NN tower)) (VP (VBN built))) (. ?)))",
     "1889",
     "the tower was built in 1889"),
    ("q026",
     "(ROOT (SBARQ (WHADVP (WRB where)) (SQ (VBD was) (NP (NNP Einstein)) (VP (VBN born))) (. ?)))",
     "Germany",
     "Einstein was born in Germany"),
    ("q027",
     "(ROOT (SBARQ (WHADVP (WRB when)) (SQ (VBD was) (NP (DT the) (NN telephone)) (VP (VBN invented))) (. ?)))",
     "1876",
     "the telephone was invented in 1876"),
    ("q028",
     "(ROOT (SBARQ (WHADVP (WRB where)) (SQ (VBD was) (NP (DT the) (NN treaty)) (VP (VBN signed))) (. ?)))",
     "Versailles",
     "the treaty was signed at Versailles"),
    ("q029",
     "(ROOT (SBARQ (WHADVP (WRB where)) (SQ (VBZ has) (NP (DT the) (NN circus)) (VP (VBN gone))) (. ?)))",
     "Chicago",
     "the circus has gone to Chicago"),
    ("q030",
     "(ROOT (SBARQ (WHNP (WP who)) (SQ (VP (VBD wrote) (NP (NNP Hamlet)))) (. ?)))",
     "Shakespeare",
     "Shakespeare wrote Hamlet"),
    ("q031",
     "(ROOT (SBARQ (WHNP (WP who)) (SQ (VP (VBD discovered) (NP (NN penicillin)))) (. ?)))",
     "Alexander Fleming",
     "Alexander Fleming discovered penicillin"),
    ("q032",
     "(ROOT (SBARQ (WHNP (WP what)) (SQ (VP (VBZ causes) (NP (NNS tides)))) (. ?)))",
     "the moon",
     "the moon causes tides"),
    ("q033",
     "(ROOT (SBARQ (WHNP (WP who)) (SQ (VP (VBD painted) (NP (DT the) (NNP Sistine) (NNP Chapel)))) (. ?)))",
     "Michelangelo",
     "Michelangelo painted the Sistine Chapel"),
    ("q034",
     "(ROOT (SBARQ (WHNP (WP who)) (SQ (VP (VBD invented) (NP (DT the) (NN light) (NN bulb)))) (. ?)))",
     "Thomas Edison",
     "Thomas Edison invented the light bulb"),
    ("q035",
     "(ROOT (SBARQ (WHADVP (WRB when)) (SQ (VBD did) (NP (DT the) (NNP Titanic)) (VP (VB sink))) (. ?)))",
     "1912",
     "the Titanic sank in 1912"),
    ("q036",
     "(ROOT (SBARQ (WHADVP (WRB where)) (SQ (VBD did) (NP (DT the) (NNPS Olympics)) (VP (VB begin))) (. ?)))",
     "Greece",
     "the Olympics began in Greece"),
    ("q037",
     "(ROOT (SBARQ (WHNP (WP what)) (SQ (VBD did) (NP (NNP Gutenberg)) (VP (VB invent))) (. ?)))",
     "the printing press",
     "Gutenberg invented the printing press"),
    ("q038",
     "(ROOT (SBARQ (WHADVP (WRB when)) (SQ (VBD did) (NP (DT the) (NN gold) (NN rush)) (VP (VB start))) (. ?)))",
     "1849",
     "the gold rush started in 1849"),
]

# Questions the parser failed on (no SBARQ/SQ node); kept to exercise the
# drop accounting and the answer-phrase passthrough.
PARSE_FAILURES = [
    ("f001",
     "(ROOT (S (VP (VB name) (NP (NP (DT the) (NN capital)) (PP (IN of) (NP (NNP Italy))))) (. .)))",
     "Rome"),
    ("f002",
     "(ROOT (FRAG (NP (NP (DT the) (JJ first) (NN person)) (PP (IN on) (NP (DT the) (NN moon)))) (. ?)))",
     "Neil Armstrong"),
]

# a4/a5 both pick the bare answer phrase here (12 of 38 questions).
LAZY = {"q001", "q002", "q005", "q009", "q012", "q016",
        "q018", "q020", "q022", "q025", "q035", "q038"}
# a3 picks a unique near-miss here.
NOISY_A3 = {"q003", "q004", "q007", "q010", "q013", "q015", "q019",
            "q023", "q026", "q029", "q031", "q036", "q037"}
# a5 picks a (different) unique near-miss here.
NOISY_A5 = {"q008", "q011", "q021", "q028", "q033"}

# Declarative sentences for the toy language models.  The correct
# preposition + answer-head bigrams used by the gold responses are attested;
# the question subjects are deliberately absent.
LM_CORPUS = [
    "the festival was first held in 1568 .",
    "the uprising spread across the provinces in 1568 .",
    "the fighting finally ended in 1945 .",
    "the factories reopened in 1945 .",
    "the expedition set out in 1492 .",
    "the fleet returned home in 1492 .",
    "the settlers went ashore at Plymouth .",
    "the harbor at Plymouth sheltered the boats .",
    "the composer settled in the city in 1791 .",
    "the opera house opened in 1791 .",
    "the uprising began in 1989 .",
    "the border opened again in 1989 .",
    "the railway reached the coast in 1845 .",
    "the county was organized in 1845 .",
    "the armies met at Waterloo .",
    "the road south passes near Waterloo .",
    "the territory was purchased in 1959 .",
    "the new harbor opened in 1959 .",
    "the river empties into the sea near the delta .",
    "the barges carried grain to the Mediterranean .",
    "the ships crossed to the Mediterranean in spring .",
    "the settlers arrived in Australia by sea .",
    "the wool trade made farms in Australia wealthy .",
    "the caravan traveled in the east for a year .",
    "the hills in the east catch the morning light .",
    "the hunters camped in bamboo forests for weeks .",
    "the trails wind through bamboo forests and over the passes .",
    "the charter expires in 2061 .",
    "the lease runs until 2061 .",
    "the painters gathered in Paris every spring .",
    "the fashion houses of Paris set the styles .",
    "the caravans crossed from Egypt to the coast .",
    "the grain ships sailed in Egypt along the river .",
    "the monastery was founded in 1066 .",
    "the chronicle was begun in 1066 .",
    "the exhibition hall was built in 1889 .",
    "the great fair of 1889 drew millions .",
    "the printing shops in Germany were famous .",
    "the universities in Germany drew students from abroad .",
    "the patent was filed in 1876 .",
    "the exchange opened in 1876 .",
    "the delegates met at Versailles .",
    "the gardens at Versailles amazed the visitors .",
    "the troupe traveled to Chicago by train .",
    "the stockyards brought workers to Chicago .",
    "the traders sailed from Scandinavia every summer .",
    "the timber came from Scandinavia by ship .",
    "the liner sank in 1912 .",
    "the rescue fleet put out in 1912 .",
    "the games were revived in Greece .",
    "the marble temples in Greece drew travelers .",
    "the miners headed west in 1849 .",
    "the claims were staked in 1849 .",
    "it was a difficult year for the whole region .",
    "it was the end of an era for the old families .",
    "it is one of the oldest cities in the world .",
    "it is the busiest port on the coast .",
    "it was a long journey and a hard one .",
    "it rained for a week and the roads washed out .",
    "they were the first settlers in the valley .",
    "they came to the coast in small boats .",
    "they lived in the mountains for many years .",
    "they built their homes near the river .",
    "they traded salt and cloth along the roads .",
    "he was a man of great learning and patience .",
    "he wrote many letters to his friends in the city .",
    "he died a poor man in a small village .",
    "he studied law and later taught it .",
    "she was the daughter of a merchant from the coast .",
    "she won the respect of the whole town .",
    "she kept careful records of every voyage .",
    "the king ruled the country for forty years .",
    "the queen visited the city in the autumn .",
    "the army crossed the river at dawn .",
    "the soldiers marched through the streets all morning .",
    "the ship sailed from the harbor in the morning .",
    "the captain kept a careful record of the voyage .",
    "the merchants traded wool and salt along the coast .",
    "the farmers worked the fields of the valley .",
    "the river flows through the heart of the country .",
    "the road runs along the edge of the forest .",
    "the bridge crosses the river near the old mill .",
    "the castle sits on a hill above the town .",
    "the church was the tallest building in the village .",
    "the walls of the city were built of stone .",
    "the library holds the records of the province .",
    "the painting hangs in the great hall of the palace .",
    "the statue stands in the square by the fountain .",
    "the news of the victory reached the city in a week .",
    "the death of the old duke shook the whole country .",
    "the rise of the railways changed the towns forever .",
    "the growth of trade brought new people to the coast .",
    "the price of bread rose sharply that winter .",
    "the stars guided the sailors across the sea .",
    "the north wind brings snow to the valley .",
    "the forest covers most of the northern hills .",
    "the desert stretches south of the mountains .",
    "the island lies off the coast of the mainland .",
    "the lake freezes over in the winter .",
    "the snow melts in the spring and fills the rivers .",
    "the rain falls mostly in the autumn months .",
    "a merchant of the city kept careful accounts .",
    "a soldier of the guard watched the gate .",
    "a farmer of the valley found old coins in his field .",
    "an engineer surveyed the pass for the railway .",
    "the first railway in the region opened to great celebration .",
    "the first school in the village had one room .",
    "the last duke of the old line died without an heir .",
    "the old market burned down and was rebuilt in brick .",
    "the great fire spread from the docks to the square .",
    "the long drought ended with the autumn rains .",
    "the whole village gathered in the square .",
    "the young prince studied languages and music .",
    "the old sailor told stories of distant ports .",
    "the small town grew into a busy city .",
    "the wide river carried barges of grain and coal .",
    "trade with the islands made the port wealthy .",
    "work on the cathedral lasted a hundred years .",
    "life in the mountains was simple and hard .",
    "news traveled slowly in those days .",
    "grain from the south fed the cities of the north .",
    "wine from the valley was famous across the sea .",
]


def normalize(text):
    return " ".join(text.lower().split())


def near_miss(texts, gold, avoid):
    """A candidate one preposition away from gold (or any other variant)."""
    gold_n = normalize(gold)
    avoid_n = {normalize(a) for a in avoid}
    lookup = {}
    for t in texts:
        lookup.setdefault(normalize(t), t)
    for right in (" in ", " at ", " to ", " from "):
        if right not in f" {gold_n} ":
            continue
        for wrong in (" on ", " at ", " during ", " by ", " in "):
            if wrong == right:
                continue
            swapped = f" {gold_n} ".replace(right, wrong).strip()
            if swapped in lookup and swapped not in avoid_n:
                return lookup[swapped]
    for t in texts:
        if normalize(t) not in avoid_n and len(t.split()) > 1:
            return t
    raise AssertionError("no near-miss candidate available")


def main():
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    instances = []
    annotations = []
    for qid, tree_s, answer, gold in QUESTIONS:
        tree = treebank.parse_ptb(tree_s)
        instance = stgen.QAInstance(qid, tuple(tree.tokens()), tree, tuple(answer.split()))
        instances.append(instance)
        output = stgen.generate(instance)
        texts = [c.text() for c in output.candidates]
        assert normalize(gold) in {normalize(t) for t in texts}, (qid, gold)

        picks = {a: gold for a in ("a1", "a2", "a3", "a4", "a5")}
        if qid in LAZY:
            picks["a4"] = answer
            picks["a5"] = answer
        if qid in NOISY_A3:
            picks["a3"] = near_miss(texts, gold, [gold, answer])
        if qid in NOISY_A5:
            picks["a5"] = near_miss(texts, gold, [gold, answer, picks["a3"]])
        for annotator, response in picks.items():
            annotations.append(
                {"question_id": qid, "annotator_id": annotator, "response": response}
            )

    for qid, tree_s, answer in PARSE_FAILURES:
        tree = treebank.parse_ptb(tree_s)
        instances.append(
            stgen.QAInstance(qid, tuple(tree.tokens()), tree, tuple(answer.split()))
        )

    with open(OUT_DIR / "instances.jsonl", "w", encoding="utf-8") as f:
        for instance in instances:
            f.write(json.dumps(stgen.instance_to_json(instance)) + "\n")
    with open(OUT_DIR / "annotations.jsonl", "w", encoding="utf-8") as f:
        for record in annotations:
            f.write(json.dumps(record) + "\n")
    with open(OUT_DIR / "lm_corpus.txt", "w", encoding="utf-8") as f:
        for sentence in LM_CORPUS:
            f.write(sentence + "\n")
    print(f"wrote {len(instances)} instances, {len(annotations)} annotations, "
          f"{len(LM_CORPUS)} corpus sentences to {OUT_DIR}")


if __name__ == "__main__":
    main()
