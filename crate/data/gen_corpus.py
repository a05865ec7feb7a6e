"""Regenerates personas.txt and sample_corpus.txt.

The corpus is template-built small talk between two persona-conditioned
speakers. It only needs to be big and varied enough for an n-gram model to produce
plausible, varied replies.

    python3 gen_corpus.py
"""

import random

PERSONAS = [
    ["i love to hike in the mountains .", "i have two dogs .", "i work as a nurse .", "my favorite food is pizza ."],
    ["i play the guitar in a band .", "i live in a small apartment .", "i am a vegetarian .", "i like to read books about history ."],
    ["i am a college student .", "i study biology .", "i have a cat named max .", "i enjoy swimming .", "my parents are teachers ."],
    ["i work at a bakery .", "i wake up very early .", "i love baking cakes .", "i have three sisters ."],
    ["i am retired .", "i like to garden .", "i have five grandchildren .", "i used to be a pilot ."],
    ["i am a software engineer .", "i play video games on weekends .", "i drink a lot of coffee .", "i live in the city .", "i want to learn to cook ."],
    ["i love to travel .", "i have been to ten countries .", "i speak three languages .", "i work as a teacher ."],
    ["i run every morning .", "i am training for a marathon .", "i eat a lot of pasta .", "i have a brother ."],
    ["i like to paint .", "i sell my art online .", "i live near the beach .", "i have a parrot ."],
    ["i am a chef .", "i cook italian food .", "i love to watch movies .", "i have a daughter .", "i grew up on a farm ."],
    ["i work in a library .", "i love to read mystery novels .", "i have a garden .", "i do not like crowds ."],
    ["i am a mechanic .", "i fix old cars .", "i like country music .", "i have a big family ."],
    ["i play soccer .", "i am in high school .", "i want to be a doctor .", "i love pizza .", "i have a dog named buddy ."],
    ["i am a musician .", "i play the piano .", "i teach music lessons .", "i live with my wife ."],
    ["i like to fish .", "i live in a small town .", "i work as a carpenter .", "i have two sons ."],
    ["i love animals .", "i volunteer at a shelter .", "i am a vegan .", "i like to do yoga ."],
    ["i work as a nurse .", "i like to knit .", "i have a cat .", "i watch a lot of tv .", "i love chocolate ."],
    ["i am a photographer .", "i travel for work .", "i like to take pictures of birds .", "i drink tea every day ."],
    ["i am a farmer .", "i grow corn .", "i have cows and chickens .", "i wake up before the sun ."],
    ["i like to dance .", "i work in an office .", "i love summer .", "i have a twin sister ."],
]

GREETINGS_A = [
    "hi , how are you today ?",
    "hello ! what do you do for fun ?",
    "hey there , how is your day going ?",
    "hi ! tell me about yourself .",
    "hello , what do you do for a living ?",
    "hi there ! do you have any hobbies ?",
    "hey , how was your weekend ?",
    "hello ! where are you from ?",
    "good morning ! how are things ?",
    "howdy ! how is it going ?",
    "greetings ! what are you up to ?",
    "yo , what is new with you ?",
]

REPLIES_TO_GREETING = [
    "i am doing well , thanks for asking .",
    "i am great ! how about you ?",
    "pretty good , just relaxing .",
    "not bad , a little tired today .",
    "good , thank you .",
    "doing fine , just got home from work .",
    "great , thanks ! just finished dinner .",
    "okay , it has been a long day .",
    "wonderful , the weather is nice here .",
    "all good here , thanks .",
    "hello ! nice to meet you .",
    "hey ! glad you asked .",
]

QUESTIONS = [
    "what do you do for work ?",
    "do you have any pets ?",
    "what do you like to do for fun ?",
    "do you have any hobbies ?",
    "what is your favorite food ?",
    "do you have a big family ?",
    "where do you live ?",
    "what kind of music do you like ?",
    "are you married ?",
    "have you traveled much ?",
    "how do you spend your weekends ?",
    "any plans for the summer ?",
]

REACTIONS = [
    "that is awesome !",
    "that sounds like fun .",
    "oh nice , i like that .",
    "wow , that is really cool .",
    "that is interesting .",
    "i have always wanted to try that .",
    "that must be nice .",
    "cool !",
    "neat , tell me more .",
    "haha , same here .",
    "really ? me too !",
    "sounds great .",
    "lucky you !",
    "awesome , good for you .",
    "interesting , i never tried that .",
    "no way , that is amazing .",
    "yeah , i understand .",
    "sweet !",
    "great to hear .",
    "oh , how fun .",
]

FOLLOWUPS = [
    "how long have you done that ?",
    "do you enjoy it ?",
    "what got you into that ?",
    "is it hard ?",
    "how often do you do that ?",
    "why do you like it ?",
    "since when ?",
    "where did you learn that ?",
]

FOLLOWUP_ANSWERS = [
    "a few years now .",
    "yes , i really enjoy it .",
    "my parents got me into it .",
    "it can be hard sometimes .",
    "almost every day .",
    "i love it , it keeps me busy .",
    "since i was a kid .",
    "mostly on sundays .",
    "honestly , it relaxes me .",
    "not really , it is easy once you start .",
    "a friend taught me .",
    "every chance i get .",
]

MARKERS = ["well ,", "oh ,", "yes ,", "actually ,", "haha ,", "sure ,", "honestly ,", "so ,", "hmm ,", "yeah ,"]

CLOSINGS = [
    "it was nice talking to you .",
    "well , i should get going . have a good day !",
    "nice to meet you !",
    "i have to go now , talk to you later .",
    "great chatting , take care !",
    "gotta run , bye !",
]

CLOSING_REPLIES = [
    "you too ! bye !",
    "nice talking to you as well .",
    "have a great day !",
    "bye , take care .",
    "see you later !",
    "goodbye !",
]

SUBJECTS = {
    "pets": ["a dog", "two dogs", "a cat", "two cats", "a parrot", "a hamster", "three fish", "a horse"],
    "jobs": ["a nurse", "a teacher", "a chef", "a mechanic", "a farmer", "a pilot", "a writer", "an accountant",
             "a lawyer", "a dentist", "a carpenter", "a software engineer", "a cashier", "a firefighter"],
    "likes": ["hiking", "reading", "painting", "cooking", "swimming", "running", "gardening", "fishing",
              "dancing", "knitting", "camping", "baking", "singing", "surfing", "skiing", "cycling"],
    "foods": ["pizza", "pasta", "sushi", "tacos", "ice cream", "chocolate", "steak", "salad", "burgers", "soup"],
    "places": ["the city", "a small town", "the mountains", "a farm", "the beach", "the suburbs", "canada", "texas"],
    "music": ["rock", "jazz", "country music", "pop", "classical music", "rap", "the blues"],
    "family": ["two sisters", "a brother", "three kids", "a twin", "a big family", "five grandchildren"],
}

PERSONA_TEMPLATES = [
    ("pets", "i have {}."),
    ("jobs", "i work as {}."),
    ("likes", "i love {}."),
    ("likes", "i enjoy {} on weekends."),
    ("foods", "my favorite food is {}."),
    ("places", "i live in {}."),
    ("music", "i listen to {}."),
    ("family", "i have {}."),
]


def random_persona(rng):
    templates = rng.sample(PERSONA_TEMPLATES, rng.randint(4, 5))
    return [t.format(rng.choice(SUBJECTS[k])).replace(".", " .") for k, t in templates]


ANSWERS = {
    "are you married ?": "family",
    "have you traveled much ?": "places",
    "how do you spend your weekends ?": "likes",
    "any plans for the summer ?": "likes",
    "what do you do for work ?": "jobs",
    "do you have any pets ?": "pets",
    "what do you like to do for fun ?": "likes",
    "do you have any hobbies ?": "likes",
    "what is your favorite food ?": "foods",
    "do you have a big family ?": "family",
    "where do you live ?": "places",
    "what kind of music do you like ?": "music",
}


def persona_line(persona, rng, topic=None):
    if topic is not None:
        matches = [line for line in persona if any(w in line for w in SUBJECTS[topic])]
        if matches:
            return rng.choice(matches)
    return rng.choice(persona)


def turn(rng, persona, prev):
    """One utterance that answers `prev`, then maybe shares and asks."""
    parts = []
    if prev.endswith(tuple(FOLLOWUPS)):
        parts.append(rng.choice(FOLLOWUP_ANSWERS))
    elif prev.endswith("?"):
        question = next((q for q in ANSWERS if prev.endswith(q)), None)
        line = persona_line(persona, rng, ANSWERS.get(question))
        if rng.random() < 0.4:
            line = rng.choice(MARKERS) + " " + line
        parts.append(line)
    else:
        parts.append(rng.choice(REACTIONS))
    r = rng.random()
    if r < 0.45:
        parts.append(rng.choice(QUESTIONS))
    elif r < 0.7:
        parts.append(rng.choice(FOLLOWUPS))
    elif r < 0.9:
        line = rng.choice(persona)
        if line not in parts:
            parts.append(line)
    return " ".join(parts)


def conversation(rng, pa, pb):
    turns = [("a", rng.choice(GREETINGS_A))]
    turns.append(("b", rng.choice(REPLIES_TO_GREETING) + " " + rng.choice(pb)))
    n = rng.randint(4, 8)
    for i in range(n):
        who, persona = ("a", pa) if i % 2 == 0 else ("b", pb)
        turns.append((who, turn(rng, persona, turns[-1][1])))
    who = "a" if n % 2 == 0 else "b"
    turns.append((who, rng.choice(CLOSINGS)))
    turns.append(("b" if who == "a" else "a", rng.choice(CLOSING_REPLIES)))
    return turns


def main():
    rng = random.Random(20190527)
    with open("personas.txt", "w") as f:
        f.write("# persona pool: one persona per block\n")
        for p in PERSONAS:
            f.write("\n")
            for line in p:
                f.write(f"persona: {line}\n")
    with open("sample_corpus.txt", "w") as f:
        f.write("# template-generated sample dialogues; see gen_corpus.py\n")
        for _ in range(600):
            pa, pb = random_persona(rng), random_persona(rng)
            f.write("\n")
            # the corpus model conditions on the responding speaker's persona
            for line in pb:
                f.write(f"persona: {line}\n")
            for who, text in conversation(rng, pa, pb):
                f.write(f"{who}: {text}\n")


if __name__ == "__main__":
    main()
