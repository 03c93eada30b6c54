#!/usr/bin/env python3
"""Regenerates the fixture corpora from the sentence banks below.

Output is committed; rerun only when the banks change:
    python3 tests/fixtures/make_corpora.py tests/fixtures
"""
import json
import random
import sys
from pathlib import Path

HUMAN = [
    "I tried this last winter and honestly it didn't go the way the guides said it would.",
    "My neighbour swears by soaking the beans overnight, but I've never noticed much difference.",
    "We ended up driving back home because the campsite was flooded by the time we arrived.",
    "Not sure why everyone recommends the expensive model when the cheap one lasted me six years.",
    "The first time I baked bread it came out flat as a pancake!",
    "Anyway, my point is that you shouldn't trust the default settings.",
    "Dr. Alvarez told me to rest the knee for two weeks, which I ignored, obviously.",
    "If you're on a budget, the library is the best resource nobody talks about.",
    "I kept a notebook of every plant I killed, and the list is embarrassingly long.",
    "Our landlord finally fixed the boiler after three months of emails.",
    "Honestly? The old version of the app was faster and I miss it.",
    "The trick with sourdough is patience, not fancy flour.",
    "My grandmother never measured anything and her soup was always perfect.",
    "We got lost twice on the way to the lake, but the view was worth it.",
    "I asked the same question on three forums and got three different answers.",
    "The bus was late again, so I walked, and it turned out to be the nicest part of my day.",
    "It took me ages to realise the noise was coming from the fridge.",
    "Whatever you do, don't paint the ceiling last.",
    "Mr. Cho, our chemistry teacher, used to set things on fire just to keep us awake.",
    "I'd rather spend an hour fixing my bike than pay someone to do it badly.",
    "The kids loved the museum, although the gift shop nearly bankrupted us.",
    "Rent went up again this year and nobody on our street is happy about it.",
    "I learned to swim at thirty and it's one of the best things I've ever done.",
    "Back then we didn't have phones, so you just waited at the corner and hoped.",
    "The recipe says twenty minutes but mine always needs at least thirty.",
    "My cat knocks a glass off the table every morning at six sharp.",
    "Some days the commute is fine and some days it feels like a punishment.",
    "I can't stand podcasts that spend ten minutes on ads before getting started.",
    "The storm took out half the fence, so that's my weekend sorted.",
    "We planted tomatoes in the wrong corner of the garden and got about four of them.",
    "Learning the guitar as an adult is humbling, to put it mildly.",
    "My brother fixed the leak with duct tape and it's still holding, somehow.",
    "The hotel looked great in the photos and awful in real life.",
    "I don't think the problem is the software, I think it's how people use it.",
    "Last spring we finally cleared out the attic and found my old school reports.",
    "Coffee after four in the afternoon means I'm awake until two.",
    "The mechanic said the noise was nothing, and two weeks later the belt snapped.",
    "You'd be surprised how many people never read the manual.",
    "Our team lost every match that season but we had a great time.",
    "I've moved house five times in eight years and I still hate packing.",
    "Maybe it's just me, but the new layout is confusing.",
    "We used to spend whole summers at my aunt's farm, feeding the goats.",
    "Running in the rain is underrated, as long as you have dry socks waiting.",
    "My first job paid terribly, yet I learned more there than anywhere since.",
    "The printer jammed during the one meeting where it actually mattered.",
    "I gave up on the diet after a week, and frankly I feel fine.",
    "The market on Saturdays has the best bread in town.",
    "Don't bother with the extended warranty, it never covers what breaks.",
    "Our old dog still thinks she's a puppy and chases every squirrel.",
    "Eventually I figured out the error was a missing comma.",
    "The train was packed, so I stood all the way to the coast.",
    "It's funny how a song can take you straight back to being fifteen.",
    "I wrote to the council about the potholes and got a form letter back.",
    "The book was slow for a hundred pages and then I couldn't put it down.",
    "We split the bill, argued about the tip, and laughed about it later.",
    "My phone died halfway up the mountain, so there are no photos.",
    "Sometimes the simplest answer really is the right one.",
    "After the third try the cake finally rose properly.",
    "I'm still not convinced that standing desks make any difference.",
    "The festival was muddy, loud, and absolutely brilliant.",
]

MACHINE = [
    "There are several factors to consider when evaluating this question.",
    "Firstly, it is important to understand the underlying principles involved.",
    "Additionally, regular maintenance can significantly extend the lifespan of the equipment.",
    "In conclusion, the best approach depends on your specific needs and circumstances.",
    "It is worth noting that individual results may vary.",
    "Overall, this method provides a reliable and efficient solution.",
    "Furthermore, research suggests that consistent practice leads to measurable improvement.",
    "One of the key benefits of this approach is its flexibility.",
    "However, there are also potential drawbacks that should be taken into account.",
    "To summarize, careful planning is essential for a successful outcome.",
    "This can be achieved by following a few simple steps.",
    "The process typically involves preparation, execution, and review.",
    "Moreover, it is advisable to consult a qualified professional before making a decision.",
    "In many cases, the simplest solution is also the most effective one.",
    "It is important to note that safety should always be the top priority.",
    "As a result, many people choose this option for its convenience.",
    "The benefits of regular exercise include improved mood and better sleep.",
    "Another important aspect is the quality of the materials used.",
    "Ultimately, the decision should be based on a thorough assessment of the available options.",
    "By understanding these factors, you can make a more informed choice.",
    "This approach has been widely adopted across a variety of industries.",
    "In addition, it is essential to set clear and achievable goals.",
    "Effective communication plays a crucial role in building strong relationships.",
    "The main advantage of this system is its ability to adapt to changing conditions.",
    "Consequently, it is recommended to monitor progress on a regular basis.",
    "Many experts agree that a balanced diet is fundamental to good health.",
    "It is also helpful to keep a record of your results over time.",
    "There is no one-size-fits-all answer to this question.",
    "For example, a small change in routine can lead to significant long-term benefits.",
    "This is particularly true for individuals who are just getting started.",
    "On the other hand, some users may prefer a more traditional approach.",
    "Proper storage conditions help to preserve the quality of the product.",
    "In general, it is better to start slowly and gradually increase the intensity.",
    "Technology continues to transform the way we live and work.",
    "The following guidelines can help you avoid common mistakes.",
    "It is crucial to remain patient throughout the learning process.",
    "Several studies have examined the relationship between these variables.",
    "This ensures that the final result meets the required standards.",
    "Understanding the needs of your audience is a vital first step.",
    "It should be noted that costs can vary depending on location.",
    "By taking these precautions, you can minimize the risk of problems.",
    "The community plays an important role in supporting local initiatives.",
    "Therefore, it is wise to compare multiple options before committing.",
    "A well-structured plan can help you stay organized and focused.",
    "These strategies can be applied in both personal and professional settings.",
    "It is generally recommended to review the terms and conditions carefully.",
    "The impact of this change may not be immediately apparent.",
    "Regular feedback allows for continuous improvement over time.",
    "This highlights the importance of preparation and attention to detail.",
    "Finally, remember that progress takes time and consistent effort.",
    "Environmental factors can also influence the overall outcome.",
    "In today's fast-paced world, efficiency has become increasingly important.",
    "Maintaining a healthy work-life balance is essential for long-term well-being.",
    "The answer to this question depends on a number of variables.",
    "Investing in quality tools can save both time and money in the long run.",
    "It is important to stay informed about the latest developments in the field.",
    "This can help to reduce stress and improve overall productivity.",
    "A clear understanding of the basics provides a strong foundation for further learning.",
    "Different methods may be more suitable for different situations.",
    "With the right approach, anyone can achieve meaningful results.",
]

HUMAN_TWEETS = [
    "ugh the wifi is down AGAIN",
    "best coffee in town, no contest",
    "why is every meeting an hour long",
    "just saw a fox in the parking lot!!",
    "monday mood: nope",
    "finally finished that book, what an ending",
    "my cat has claimed the keyboard, send help",
    "rain all week apparently. great.",
    "who decided socks should come in pairs and then vanish",
    "new record on my morning run today",
    "train cancelled, walking it is",
    "can't believe it's already october",
    "the neighbours are drilling at 7am on a sunday",
    "made pancakes, burned pancakes, ate pancakes",
    "this playlist is carrying my whole week",
    "forgot my umbrella, obviously",
    "lunch was a sad sandwich",
    "shoutout to the bus driver who waited for me",
    "the game last night was unreal",
    "who else is still awake",
    "tried the new place downtown, overrated imo",
    "garden update: one tomato",
    "my phone autocorrects my own name",
    "spent an hour looking for my glasses. on my head.",
    "snow!! actual snow!!",
]

MACHINE_TWEETS = [
    "Start your day with gratitude and positive energy!",
    "Success is the result of consistent effort and dedication.",
    "Check out these five tips for better productivity.",
    "Stay hydrated and take care of your health today.",
    "Innovation drives progress in every industry.",
    "Remember to take breaks and recharge your mind.",
    "Exciting news is coming soon, stay tuned!",
    "Small steps lead to big achievements.",
    "Learning never stops, keep growing every day.",
    "Teamwork makes the dream work.",
    "Discover the benefits of a balanced lifestyle.",
    "Embrace change and unlock new opportunities.",
    "Your mindset shapes your reality.",
    "Great things take time, so stay patient.",
    "Here are three ways to improve your morning routine.",
    "Believe in yourself and keep moving forward.",
    "Quality content builds lasting connections.",
    "Celebrate every milestone along the way.",
    "Technology is changing the way we communicate.",
    "Make today count with purpose and passion.",
    "Sustainability starts with small daily choices.",
    "Kindness is always in style.",
    "Focus on progress, not perfection.",
    "Every challenge is an opportunity to grow.",
    "Invest in yourself, it pays the best interest.",
]

SPLITS = ["train", "dev", "test"]


def assemble(rng, bank, lo, hi):
    return " ".join(rng.sample(bank, rng.randint(lo, hi)))


def build(rng, prefix, specs):
    docs = []
    for label, bank, count, lo, hi, generator in specs:
        for k in range(count):
            docs.append({
                "id": f"{prefix}-{label[0]}{k:04d}",
                "text": assemble(rng, bank, lo, hi),
                "label": label,
                "generator": generator,
                "lang": "en",
                "split": SPLITS[k % 3],
            })
    rng.shuffle(docs)
    return docs


def write(path, docs):
    with open(path, "w", encoding="utf-8") as f:
        for d in docs:
            f.write(json.dumps(d, ensure_ascii=False, sort_keys=True) + "\n")


def counts(docs):
    out = {"total": len(docs), "human": 0, "machine": 0}
    for d in docs:
        out[d["label"]] += 1
    return out


def main(out_dir):
    out = Path(out_dir)
    rng = random.Random(20240611)
    natural = build(rng, "nat", [
        ("human", HUMAN, 240, 10, 16, None),
        ("machine", MACHINE, 220, 10, 16, "template-lm"),
    ])
    short = build(rng, "tw", [
        ("human", HUMAN_TWEETS, 150, 1, 2, None),
        ("machine", MACHINE_TWEETS, 150, 1, 2, "template-lm"),
    ])
    write(out / "natural.jsonl", natural)
    write(out / "short.jsonl", short)
    manifest = {"natural.jsonl": counts(natural), "short.jsonl": counts(short)}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parent)
