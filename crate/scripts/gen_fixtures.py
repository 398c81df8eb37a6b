#!/usr/bin/env python3
"""Regenerates the bundled fixtures under fixtures/.

Deterministic: the same script always writes the same bytes. Every count the
tests rely on is asserted here before anything is written.
"""

import json
import random
import re
import unicodedata
from collections import Counter, OrderedDict
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "fixtures"
RNG = random.Random(20190611)

SEP = re.compile(r"[\s\-‐‑‒–—−'’‘ʼ`´\"“”«»,;()\[\]]+")


def tokens(s):
    return [t.lower() for t in SEP.split(s) if t]


def key(s):
    return " ".join(tokens(s))


# --------------------------------------------------------------------------
# lexicons

GIVEN = """adeline adolphe adrien agathe agnès alain albert albertine alexandre alfred alice aline
alphonse amandine amédée anatole andré angèle anne antoine armand arthur auguste august augustin
baudouin benoît bernard berthe blanche camille carl caroline catherine cécile charles charlotte
christian christophe claire claude clément colette constant constantin daniel denis désiré dirk
dominique edgard edmond édouard eduard élise émile emile emma ernest étienne eugène fernand firmin
florent françois frans frédéric gabriel gaston georges gérard germaine gilbert gilles gustave
guillaume gustaaf hector hélène henri hendrik herman hervé herve hilda hubert hugo isidore jacques
jan jean jeanne jef jérôme joseph jozef jules julien juliette karel laurent léa léon léonie léopold
lieven louis louise lucien lucie madeleine marc marcel marguerite maria marie marthe martin mathilde
maurice max michel nicolas noël octave odile olivier oscar paul paula pauline petrus philippe
pierre pieter pole prosper raymond rené robert roger rosa simone sophie stefaan suzanne théodore
théophile thérèse valentin victor victorine willem xavier yvonne zoé""".split()

PARTICLES = ["van", "von", "de", "du", "della", "van den", "van der", "de la", "vanden", "vander", "le"]

# words used around entities in generated queries; all are common words
QUERY_CONTEXT = """histoire carte postale journal guide guerre archives photos ancien plan musée
poèmes oeuvres biographie lettres portrait chronique vue vues gravure souvenir souvenirs annuaire
revue catalogue manuscrit manuscrits affiche affiches recueil exposition collection mémoires
presse""".split()

COMMON = sorted(set("""de la le les du des et en au aux un une sur sous dans pour par avec sans
het een en op te ten ter der den van voor met uit bij naar over tot
the of and in on for to with
grand grande petit petite nouveau nouvelle vieux vieille belge belgique royal royale national
nationale général générale saint sainte sint rue place église gare hôtel ville château palais parc
pont porte quai route chemin avenue boulevard marché école université hôpital
livre livres roman romans texte textes dictionnaire encyclopédie atlas
""".split()) | set(QUERY_CONTEXT))

for w in PARTICLES:
    assert all(t in COMMON or t in {"von", "della", "vanden", "vander"} for t in tokens(w))

GIVEN_SET = set(GIVEN)
COMMON_SET = set(COMMON)
assert not GIVEN_SET & COMMON_SET, GIVEN_SET & COMMON_SET
PARTICLE_TOKENS = {t for p in PARTICLES for t in tokens(p)}

# --------------------------------------------------------------------------
# gazetteer

REAL = [
    # id, canonical, kind, wikidata, lat, lon, population, aliases
    ("21004", "Bruxelles", "MUNICIPALITY", "Q239", 50.8467, 4.3525, 185103, ["Brussel", "Brussels", "Brüssel", "Bruselas", "Bruxelles-Ville", "Brussel-Stad"]),
    ("11002", "Antwerpen", "MUNICIPALITY", "Q12892", 51.2211, 4.3997, 529247, None),
    ("44021", "Gent", "MUNICIPALITY", "Q1296", 51.0536, 3.7253, 263927, ["Gand", "Ghent", "Gante"]),
    ("62063", "Liège", "MUNICIPALITY", "Q3037", 50.6412, 5.5718, 197355, ["Luik", "Lüttich", "Liege", "Lieja"]),
    ("92094", "Namur", "MUNICIPALITY", "Q130263", 50.4669, 4.8675, 110939, ["Namen"]),
    ("52011", "Charleroi", "MUNICIPALITY", "Q43338", 50.4108, 4.4446, 201816, []),
    ("53053", "Mons", "MUNICIPALITY", "Q43339", 50.4542, 3.9567, 95299, ["Bergen"]),
    ("24062", "Leuven", "MUNICIPALITY", "Q118958", 50.8798, 4.7005, 101396, ["Louvain", "Löwen"]),
    ("31005", "Brugge", "MUNICIPALITY", "Q12994", 51.2093, 3.2247, 118284, ["Bruges", "Brügge", "Brujas"]),
    ("13040", "Turnhout", "MUNICIPALITY", "Q209863", 51.3227, 4.9447, 45586, []),
    ("63035", "Herve", "MUNICIPALITY", "Q208997", 50.6386, 5.7937, 17505, ["Hervé"]),
    ("23062", "Overijse", "MUNICIPALITY", "Q15373", 50.7744, 4.5381, 25446, ["Overyssche", "Isque"]),
    ("35013", "Oostende", "MUNICIPALITY", "Q1298", 51.2154, 2.9286, 71494, ["Ostende", "Ostend"]),
    ("57081", "Tournai", "MUNICIPALITY", "Q9192", 50.6056, 3.3878, 69554, ["Doornik"]),
    ("71022", "Hasselt", "MUNICIPALITY", "Q1221", 50.9307, 5.3378, 78714, []),
    ("12025", "Mechelen", "MUNICIPALITY", "Q162022", 51.0259, 4.4776, 86921, ["Malines", "Mecheln"]),
    ("81001", "Arlon", "MUNICIPALITY", "Q182592", 49.6833, 5.8167, 30239, ["Aarlen"]),
    ("82003", "Bastogne", "MUNICIPALITY", "Q184244", 50.0030, 5.7186, 16062, ["Bastenaken"]),
    ("91034", "Dinant", "MUNICIPALITY", "Q192940", 50.2606, 4.9122, 13630, []),
    ("63072", "Spa", "MUNICIPALITY", "Q192971", 50.4921, 5.8650, 10475, []),
    ("33011", "Ieper", "MUNICIPALITY", "Q102426", 50.8503, 2.8833, 35089, ["Ypres", "Yper"]),
    ("34022", "Kortrijk", "MUNICIPALITY", "Q199865", 50.8281, 3.2650, 76735, ["Courtrai"]),
    ("41002", "Aalst", "MUNICIPALITY", "Q12297", 50.9378, 4.0403, 86445, ["Alost"]),
    ("71016", "Genk", "MUNICIPALITY", "Q1294", 50.9650, 5.5008, 66110, []),
    ("63079", "Verviers", "MUNICIPALITY", "Q207989", 50.5891, 5.8627, 55198, []),
    ("25112", "Wavre", "MUNICIPALITY", "Q213869", 50.7167, 4.6000, 34479, ["Waver"]),
    ("25072", "Nivelles", "MUNICIPALITY", "Q213922", 50.5981, 4.3286, 28521, ["Nijvel"]),
    ("25110", "Waterloo", "MUNICIPALITY", "Q31579", 50.7147, 4.3997, 29963, []),
    ("61031", "Huy", "MUNICIPALITY", "Q213794", 50.5189, 5.2393, 21231, ["Hoei"]),
    ("63023", "Eupen", "MUNICIPALITY", "Q189895", 50.6283, 6.0361, 19578, []),
    ("63049", "Malmedy", "MUNICIPALITY", "Q193025", 50.4261, 6.0275, 12739, ["Malmünd"]),
    ("83012", "Durbuy", "MUNICIPALITY", "Q207034", 50.3528, 5.4561, 11715, []),
    ("56016", "Chimay", "MUNICIPALITY", "Q192790", 50.0486, 4.3167, 9863, []),
    ("51004", "Ath", "MUNICIPALITY", "Q193008", 50.6297, 3.7797, 29298, ["Aat"]),
    ("56011", "Binche", "MUNICIPALITY", "Q209009", 50.4111, 4.1653, 33631, []),
    ("55040", "Soignies", "MUNICIPALITY", "Q213829", 50.5794, 4.0711, 27853, ["Zinnik"]),
    ("24107", "Tienen", "MUNICIPALITY", "Q217040", 50.8075, 4.9378, 34830, ["Tirlemont"]),
    ("12021", "Lier", "MUNICIPALITY", "Q187992", 51.1314, 4.5703, 36487, ["Lierre"]),
    ("13008", "Geel", "MUNICIPALITY", "Q208839", 51.1617, 4.9908, 40608, []),
    ("45041", "Ronse", "MUNICIPALITY", "Q208841", 50.7456, 3.6006, 26559, ["Renaix"]),
    ("42006", "Dendermonde", "MUNICIPALITY", "Q206549", 51.0283, 4.1011, 46191, ["Termonde"]),
    ("23088", "Vilvoorde", "MUNICIPALITY", "Q208810", 50.9281, 4.4253, 44866, ["Vilvorde"]),
    ("23027", "Halle", "MUNICIPALITY", "Q208779", 50.7339, 4.2345, 40009, ["Hal"]),
    ("21009", "Ixelles", "MUNICIPALITY", "Q193317", 50.8333, 4.3667, 87632, ["Elsene"]),
    ("21015", "Schaerbeek", "MUNICIPALITY", "Q193442", 50.8676, 4.3737, 133010, ["Schaarbeek"]),
    ("21001", "Anderlecht", "MUNICIPALITY", "Q191214", 50.8333, 4.3072, 119714, []),
    ("21016", "Uccle", "MUNICIPALITY", "Q193417", 50.8000, 4.3333, 83328, ["Ukkel"]),
    ("21013", "Saint-Gilles", "MUNICIPALITY", "Q193410", 50.8269, 4.3458, 50471, ["Sint-Gillis"]),
    ("55086", "La Louvière", "MUNICIPALITY", "Q211620", 50.4806, 4.1875, 80719, []),
    ("25050", "La Hulpe", "MUNICIPALITY", "Q213859", 50.7306, 4.4856, 7384, ["Terhulpen"]),
    ("25014", "Braine-l'Alleud", "MUNICIPALITY", "Q213832", 50.6833, 4.3667, 39940, ["Eigenbrakel"]),
    ("25121", "Ottignies-Louvain-la-Neuve", "MUNICIPALITY", "Q213869b", 50.6667, 4.5667, 31705, ["Louvain-la-Neuve"]),
    ("62118", "Saint-Nicolas", "MUNICIPALITY", "Q216580", 50.6300, 5.5360, 24345, []),
    ("46021", "Sint-Niklaas", "MUNICIPALITY", "Q11947", 51.1650, 4.1430, 78420, ["Saint-Nicolas"]),
    ("84059", "Saint-Hubert", "MUNICIPALITY", "Q193183", 50.0264, 5.3736, 5745, []),
    ("31043", "Knokke-Heist", "MUNICIPALITY", "Q185397", 51.3500, 3.2667, 33818, []),
    ("31004", "Blankenberge", "MUNICIPALITY", "Q208796", 51.3128, 3.1322, 20076, []),
    ("38008", "De Panne", "MUNICIPALITY", "Q208823", 51.1000, 2.5917, 11047, ["La Panne"]),
    ("71053", "Sint-Truiden", "MUNICIPALITY", "Q213851", 50.8167, 5.1833, 40908, ["Saint-Trond"]),
    ("52022", "Fleurus", "MUNICIPALITY", "Q213867", 50.4833, 4.5500, 22840, []),
    ("57093", "Brunehaut", "MUNICIPALITY", "Q1006102", 50.5100, 3.3900, 7872, []),
    ("58001", "Morlanwelz", "MUNICIPALITY", "Q213891", 50.4550, 4.2450, 19203, []),
    ("57093-WV", "Wez-Velvain", "DISTRICT", "", 50.5442, 3.3925, None, []),
    ("58001-MSA", "Mont-Sainte-Aldegonde", "DISTRICT", "", 50.4500, 4.2230, None, []),
    ("21004-LA", "Laeken", "DISTRICT", "Q464479", 50.8833, 4.3500, None, ["Laken"]),
    ("62063-GR", "Grivegnée", "DISTRICT", "", 50.6200, 5.6000, None, []),
    ("92094-JA", "Jambes", "DISTRICT", "Q1016580", 50.4500, 4.8700, None, []),
    ("11002-BE", "Berchem", "DISTRICT", "", 51.2000, 4.4300, None, []),
    ("11002-BO", "Borgerhout", "DISTRICT", "", 51.2100, 4.4400, None, []),
    ("44021-LE", "Ledeberg", "DISTRICT", "", 51.0400, 3.7400, None, []),
]

ANTWERP_ALIASES = """Anvers Antwerp Amberes Anversa Antuérpia Antwerpia Antverpia Antwerpe Antorf Antwerpien
Anverso Antwerpa Antverpen Antuerpia Anveres Antvèrpia Antwerpiae Andwerpen Anwerpen Antwérp Antwerpes
Antwerpo Antwerpaen Hantwerpen Antwerpun Антверпен Αμβέρσα アントワープ 安特卫普 أنتويرب אנטוורפן 안트베르펜
Անտվերպեն ანტვერპენი Антверп Антверпэн Amberes-Antwerpen""".split()
ANTWERP_SECTORS = """Noord Zuid Oost West Centrum Haven Kiel Linkeroever Dam Zurenborg Eilandje Seefhoek
Stuivenberg Sint-Andries Schipperskwartier Harmonie Markgrave Brederode Luchtbal Rozemaai Kaai Meir
Groenplaats Stadspark Entrepot Tolhuis Muggenberg Schijnpoort Dam-Oost Slachthuis Nieuw-Zuid Petroleum
Boerenkrijg Kattendijk Bonaparte Willem Kempisch Lefebvre Asiadok Amerikadok Hoboken Merksem""".split()

FOREIGN = [
    ("FR-75056", "Paris", "MUNICIPALITY", "FR", "Q90", 48.8566, 2.3522, 2165423, ["Parijs", "Parigi"]),
    ("CD-KIN", "Kinshasa", "MUNICIPALITY", "CD", "Q3838", -4.3250, 15.3222, 14970000, ["Léopoldville", "Leopoldstad"]),
    ("NL-0363", "Amsterdam", "MUNICIPALITY", "NL", "Q727", 52.3676, 4.9041, 872680, []),
]

PREFIX = """Bel Ber Bor Dor Eck Fel Gel Ham Hel Hol Kel Lan Lem Lin Mar Mel Mer Nol Oel Ost Pel Rem Rum Sel
Ster Tel Ul Vel Vor Wel Wes Zel Zon Bra Cor Dal Fra Gra Jal Lor Mor Pra Rob Sor Tav Vir Aud Bau Cen Gos
Hoe Jod Kwa Lae Meu Neu Oud Pom Quie Rei Sme Tro Vla Wan Ys Zut""".split()
MID = ["", "", "a", "e", "i", "o", "en", "er", "el", "an", "ver", "le"]
SUFFIX = """beek gem hout ville court sart mont rode zele dijk ingen ghem kerke broek laar hem aken dorp ignies
ennes ières ange oy bais val fontaine wez lo drecht""".split()
FR_DU = {"beek": "becq", "gem": "ghem", "hout": "houte", "kerke": "querque", "broek": "brouck",
         "ville": "veld", "court": "kort", "mont": "berg", "ingen": "inghe", "rode": "roode", "laar": "lare"}

RESERVED = GIVEN_SET | COMMON_SET | PARTICLE_TOKENS


def synth_names(n):
    names, seen = [], set()
    while len(names) < n:
        base = RNG.choice(PREFIX) + RNG.choice(MID) + RNG.choice(SUFFIX)
        r = RNG.random()
        if r < 0.08:
            other = RNG.choice(PREFIX) + RNG.choice(SUFFIX)
            name = f"{base}-{other}"
        elif r < 0.12:
            name = f"{base}-lez-{RNG.choice(PREFIX)}{RNG.choice(SUFFIX)}"
        elif r < 0.15:
            name = f"Saint-{base}"
        elif r < 0.18:
            name = f"Sint-{base}"
        else:
            name = base
        k = key(name)
        toks = tokens(name)
        if k in seen or any(t in (GIVEN_SET | PARTICLE_TOKENS) for t in toks):
            continue
        if len(toks) == 1 and toks[0] in COMMON_SET:
            continue
        seen.add(k)
        names.append(name)
    return names


def build_gazetteer():
    locs = []  # (id, name, kind, country, wd, lat, lon, pop)
    aliases = []  # (id, alias)
    used = set()
    for lid, name, kind, wd, lat, lon, pop, al in REAL:
        locs.append((lid, name, kind, "BE", wd, lat, lon, pop))
        used.add(key(name))
        if lid == "11002":
            al = ANTWERP_ALIASES + [f"Antwerpen-{s}" for s in ANTWERP_SECTORS] + [f"Anvers-{s}" for s in ANTWERP_SECTORS]
            al = list(OrderedDict.fromkeys(al))[:119]
            assert len(al) == 119, len(al)
        for a in al:
            aliases.append((lid, a))
            used.add(key(a))
    real_ids = {l[0] for l in locs}
    target_be = 3000
    n_synth = target_be - len(locs)
    municipalities = sum(1 for l in locs if l[2] == "MUNICIPALITY")
    names = [n for n in synth_names(n_synth + 200) if key(n) not in used][:n_synth]
    for i, name in enumerate(names):
        kind = "MUNICIPALITY" if municipalities < 589 else "DISTRICT"
        if kind == "MUNICIPALITY":
            municipalities += 1
            lid = f"9{i:04d}"
            pop = RNG.randint(2000, 60000)
        else:
            lid = f"9{i:04d}-D"
            pop = RNG.randint(300, 9000) if RNG.random() < 0.5 else None
        assert lid not in real_ids
        lat = round(RNG.uniform(49.55, 51.45), 4)
        lon = round(RNG.uniform(2.6, 6.3), 4)
        if kind == "DISTRICT" and i % 997 == 0:
            lat = lon = None
        locs.append((lid, name, kind, "BE", "", lat, lon, pop))
        used.add(key(name))
        last = tokens(name)[-1]
        for suf, alt in FR_DU.items():
            if name.endswith(suf) and RNG.random() < 0.5:
                a = name[: -len(suf)] + alt
                if key(a) not in used and not set(tokens(a)) & RESERVED:
                    aliases.append((lid, a))
                    used.add(key(a))
                break
        del last
    for lid, name, kind, country, wd, lat, lon, pop, al in FOREIGN:
        locs.append((lid, name, kind, country, wd, lat, lon, pop))
        for a in al:
            aliases.append((lid, a))
    return locs, aliases


def write_gazetteer(locs, aliases):
    d = OUT / "gazetteer"
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "locations.tsv", "w", encoding="utf-8") as f:
        f.write("location_id\tcanonical_name\tkind\tcountry\twikidata_id\tlat\tlon\tpopulation\n")
        for lid, name, kind, country, wd, lat, lon, pop in locs:
            cells = [lid, name, kind, country, wd,
                     "" if lat is None else f"{lat}", "" if lon is None else f"{lon}",
                     "" if pop is None else str(pop)]
            f.write("\t".join(cells) + "\n")
    with open(d / "aliases.tsv", "w", encoding="utf-8") as f:
        f.write("location_id\talias\n")
        for lid, a in aliases:
            f.write(f"{lid}\t{a}\n")


class Index:
    """Alias lookup over BE locations, mirroring the exact longest-match rule."""

    def __init__(self, locs, aliases):
        be = {l[0] for l in locs if l[3] == "BE"}
        self.ids = {}
        for l in locs:
            if l[0] in be:
                self.ids.setdefault(tuple(tokens(l[1])), set()).add(l[0])
        for lid, a in aliases:
            if lid in be:
                self.ids.setdefault(tuple(tokens(a)), set()).add(lid)
        self.maxlen = max(len(k) for k in self.ids)
        self.tokens = {t for k in self.ids for t in k}

    def resolve(self, text):
        return self.ids.get(tuple(tokens(text)))

    def matches(self, toks):
        out, i = [], 0
        while i < len(toks):
            for n in range(min(self.maxlen, len(toks) - i), 0, -1):
                if tuple(toks[i:i + n]) in self.ids:
                    out.append((i, i + n))
                    i += n
                    break
            else:
                i += 1
        return out

    def any_ngram(self, toks):
        return any(tuple(toks[i:j]) in self.ids for i in range(len(toks)) for j in range(i + 1, len(toks) + 1))


# --------------------------------------------------------------------------
# gold corpus

SURNAMES = """pollet dubois dumont lambert martens peeters janssens maes jacobs mertens willems claes goossens
wouters de-smet leclercq lejeune renard dupont lemaire michaux collard gilson hanssens
verstraete desmet vandamme coppens cools hermans verhoeven smets bogaerts moens aerts stevens
verhaeren simenon maeterlinck quetelet solvay khnopff ensor magritte rubens jordaens brel hergé
delvaux permeke rops meunier horta khnopf vandevelde rodenbach lemonnier conscience gezelle
timmermans streuvels elskamp crommelynck ghelderode nothomb grétry ysaÿe
vieuxtemps sax lemaître plisnier thiry bauchau mallet baillon""".replace("de-smet", "desmet").split()
SURNAMES = list(OrderedDict.fromkeys(SURNAMES))


def check_surname(s):
    assert s not in RESERVED, s


for s in SURNAMES:
    check_surname(s)

FOREIGN_PLACES = """paris londres rome berlin lille maastricht aachen aix-la-chapelle cologne vienne madrid
lisbonne amsterdam rotterdam la-haye luxembourg-ville kinshasa léopoldville congo lubumbashi
élisabethville new-york washington moscou varsovie prague genève lausanne strasbourg metz reims
calais dunkerque valenciennes cambrai arras douai roubaix tourcoing lyon marseille""".split()
POI = """église saint-paul|gare du nord|rue neuve|place royale|parc du cinquantenaire|palais de justice|
grand-place|mont des arts|hôtel de ville|château de gaasbeek|abbaye de villers|beffroi|
cathédrale saint-bavon|porte de hal|atomium|galeries royales|musée wiertz|pont des arches|
citadelle|jardin botanique|théâtre de la monnaie|quai de la batte|rue des bouchers|
église notre-dame|place saint-lambert|béguinage|tour d'oudenaarde|phare|moulin de la roche""".replace("\n", "").split("|")
REGIONS = """flandre wallonie ardennes campine hainaut brabant limbourg gaume condroz famenne
pays de herve borinage westhoek hesbaye entre-sambre-et-meuse brabant wallon luxembourg belge
flandre occidentale flandre orientale ostbelgien polders kempen haspengouw""".split("\n")
REGIONS = [r.strip() for line in REGIONS for r in re.split(r"\s{2,}|(?<=[a-z]) (?=[a-z]+$)", line)]
REGIONS = ["flandre", "wallonie", "ardennes", "campine", "hainaut", "brabant", "limbourg", "gaume",
           "condroz", "famenne", "pays de herve", "borinage", "westhoek", "hesbaye",
           "entre-sambre-et-meuse", "brabant wallon", "flandre occidentale", "flandre orientale",
           "ostbelgien", "polders", "kempen", "haspengouw", "zélande", "picardie", "ardenne bleue"]

MISSPELLINGS = [
    ("wez", "57093-WV"), ("overrvssche", "23062"), ("bxl", "21004"), ("anwterp", "11002"),
    ("bruxels", "21004"), ("liége", "62063"), ("namr", "92094"), ("charelroi", "52011"),
    ("leuwen", "24062"), ("brugges", "31005"), ("turhout", "13040"), ("ostand", "35013"),
    ("tournay", "57081"), ("hasselth", "71022"), ("mechlen", "12025"), ("arlont", "81001"),
    ("bastonge", "82003"), ("dinnant", "91034"), ("kortijk", "34022"), ("vervier", "63079"),
    ("st-nicolas", "62118"), ("mt ste aldegonde", "58001-MSA"), ("lln", "25121"),
]

PLAIN_QUERIES = []


def plain_queries(n):
    words = sorted(QUERY_CONTEXT)
    extra = ["de la", "du", "des", "belge", "ancien", "royal", "nouvelle", "générale", "nationale"]
    out, seen = [], set()
    while len(out) < n:
        a, b = RNG.sample(words, 2)
        q = f"{a} {RNG.choice(extra)} {b}" if RNG.random() < 0.6 else f"{a} {b}"
        if key(q) not in seen:
            seen.add(key(q))
            out.append(q)
    return out


LOC_CTX = ["{}", "histoire de {}", "carte postale {}", "{} 1914", "journal de {}", "guide {}",
           "{} guerre", "archives {}", "photos {}", "plan de {}", "vues de {}", "{} ancien",
           "souvenir de {}", "gravure {}", "annuaire de {}", "{} 1830", "chronique de {}"]
PER_CTX = ["{}", "{} poèmes", "oeuvres de {}", "{} biographie", "lettres de {}", "portrait {}",
           "{} 1920", "mémoires de {}", "{} manuscrits", "revue {}"]


def build_gsc(idx, locs, aliases):
    # co-annotation table: rows first annotator, columns second
    order = ["PER", "PER_AMBIG", "PER_LOC", "LOC", "AMBIG"]
    diag = {"PER": 473, "PER_AMBIG": 17, "PER_LOC": 16, "LOC": 313, "AMBIG": 10}
    off = {("PER", "PER_AMBIG"): 7, ("PER", "PER_LOC"): 1, ("PER", "LOC"): 4, ("PER", "AMBIG"): 1,
           ("PER_AMBIG", "PER"): 1, ("PER_LOC", "PER"): 1, ("PER_LOC", "PER_AMBIG"): 1,
           ("LOC", "PER"): 2, ("LOC", "PER_LOC"): 2}
    assert sum(diag.values()) + sum(off.values()) == 849
    a1 = Counter()
    a2 = Counter()
    for c, n in diag.items():
        a1[c] += n
        a2[c] += n
    for (x, y), n in off.items():
        a1[x] += n
        a2[y] += n
    assert [a2[c] for c in order] == [477, 25, 19, 317, 11]
    assert [a1[c] for c in order] == [486, 18, 18, 317, 10]

    entities = []  # dicts: a1, a2, consensus, surface, full, ref, kind

    # LOC: 175 resolvable, 23 misspelt with refs, 115 outside the subset
    loc_surfaces = []
    pool = []
    for l in locs:
        if l[3] != "BE":
            continue
        for form in [l[1]] + [a for lid, a in aliases if lid == l[0]]:
            t = tokens(form)
            if len(t) == 1 and (t[0] in GIVEN_SET or t[0] in COMMON_SET):
                continue
            if set(t) & GIVEN_SET:
                continue
            pool.append(form)
    real_forms = [f for f in pool if any(f == r[1] or f in (r[7] or []) for r in REAL)]
    synth_forms = [f for f in pool if f not in real_forms]
    RNG.shuffle(synth_forms)
    resolvable = real_forms[:95] + synth_forms[:78]
    resolvable += ["Saint-Nicolas", "Bruxelles"]
    assert len(resolvable) == 175
    style = lambda s: RNG.choice([s, s.lower(), s.lower(), s.upper() if len(s) < 12 else s.lower()])
    for s in resolvable:
        assert idx.resolve(s), s
        loc_surfaces.append((style(s), None))
    for s, ref in MISSPELLINGS:
        assert not idx.any_ngram(tokens(s)), s
        loc_surfaces.append((s, ref))
    outside = FOREIGN_PLACES + POI + REGIONS
    outside = [o for o in outside if not idx.resolve(o)]
    others = [RNG.choice(outside) for _ in range(115 - len(outside))] + outside
    others = others[:115]
    for o in others:
        assert not idx.resolve(o), o
        loc_surfaces.append((o, None))
    assert len(loc_surfaces) == 313
    for s, ref in loc_surfaces:
        entities.append(dict(a1="LOC", a2="LOC", consensus="LOC", surface=s, full=False, ref=ref))

    # person family: 141 consensus full names
    def full_name(kind):
        g = RNG.choice([x for x in GIVEN if x not in ("herve", "hervé", "pole")])
        s = RNG.choice(SURNAMES)
        if kind == "particle":
            p = RNG.choice(["van", "de", "van der", "van den", "de la"])
            return f"{g} {p} {s}"
        if kind == "inverted":
            p = RNG.choice(["van", "de", ""])
            return f"{p} {s} {g}".strip()
        if kind == "double":
            return f"{g} {s} {RNG.choice(SURNAMES)}"
        if kind == "two_given":
            return f"{g} {RNG.choice(GIVEN)}"
        return f"{g} {s}"

    kinds = (["plain"] * 100 + ["particle"] * 14 + ["inverted"] * 12 + ["double"] * 6 + ["two_given"] * 9)
    RNG.shuffle(kinds)
    full = [full_name(k).title() if RNG.random() < 0.3 else full_name(k) for k in kinds]
    full[0] = "august van turnhout"
    full[1] = "van loo prosper"
    full[2] = "curer bell"
    full[3] = "victor hugo"
    per_full = full[:130]
    pa_full = full[130:136]
    pl_full = full[136:141]
    famous = ["simenon", "verhaeren", "maeterlinck", "magritte", "hergé", "brel", "ensor", "rubens",
              "horta", "rops", "delvaux", "permeke", "conscience", "gezelle", "streuvels", "ghelderode"]

    def partial_person():
        r = RNG.random()
        if r < 0.6:
            return RNG.choice(famous + SURNAMES)
        if r < 0.8:
            return f"{RNG.choice(['m.', 'mme', 'dr', 'abbé'])} {RNG.choice(SURNAMES)}"
        return RNG.choice(["léopold ii", "albert ier", "baudouin ier", "charles quint", "marie-thérèse",
                           "philippe le bon", "godefroid de bouillon", "saint-hubert", "sainte-gudule"])

    for s in per_full:
        entities.append(dict(a1="PER", a2="PER", consensus="PER", surface=s, full=True, ref=None))
    for _ in range(473 - len(per_full)):
        entities.append(dict(a1="PER", a2="PER", consensus="PER", surface=partial_person(), full=False, ref=None))
    for s in pa_full:
        entities.append(dict(a1="PER_AMBIG", a2="PER_AMBIG", consensus="PER_AMBIG", surface=s, full=True, ref=None))
    pa_words = ["baudouin", "léopold", "albert", "astrid", "fabiola", "élisabeth", "charlotte", "mathilde",
                "paola", "stéphanie", "clémentine"]
    for i in range(17 - len(pa_full)):
        entities.append(dict(a1="PER_AMBIG", a2="PER_AMBIG", consensus="PER_AMBIG", surface=pa_words[i], full=False, ref=None))
    for s in pl_full:
        entities.append(dict(a1="PER_LOC", a2="PER_LOC", consensus="PER_LOC", surface=s, full=True, ref=None))
    pl_words = ["saint-hubert", "sint-truiden", "saint-gilles", "saint-nicolas", "mont-saint-guibert",
                "sainte-ode", "saint-ghislain", "sint-martens-latem", "saint-léger", "sint-amands", "saint-georges"]
    for i in range(16 - len(pl_full)):
        entities.append(dict(a1="PER_LOC", a2="PER_LOC", consensus="PER_LOC", surface=pl_words[i], full=False, ref=None))
    ambig_words = ["tintin", "manneken-pis", "lion de waterloo", "la brabançonne", "gambrinus",
                   "ommegang", "gilles", "doudou", "saint-verhaegen", "marie-josé"]
    for w in ambig_words:
        entities.append(dict(a1="AMBIG", a2="AMBIG", consensus="AMBIG", surface=w, full=False, ref=None))

    disputed_surfaces = {
        "PER": ["van gogh", "le roi", "dr schweitzer", "père damien", "abbé froidure", "jean de nivelles",
                "l'aiglon", "thyl ulenspiegel", "sainte-gudule", "fernand", "la malibran", "sire de créqui",
                "comte d'egmont", "jan breydel", "pieter coutereel"],
        "PER_AMBIG": ["charles de lorraine"], "PER_LOC": ["saint-servais", "godefroid"],
        "LOC": ["fort de loncin", "bois de la cambre", "tour japonaise", "pavillon chinois"],
    }
    used_d = Counter()
    for (x, y), n in sorted(off.items()):
        for _ in range(n):
            s = disputed_surfaces[x][used_d[x]]
            used_d[x] += 1
            entities.append(dict(a1=x, a2=y, consensus=None, surface=s, full=False, ref=None))
    assert len(entities) == 849

    # check consensus/annotator totals
    cons = Counter(e["consensus"] for e in entities if e["consensus"])
    assert cons == Counter(diag), cons
    assert Counter(e["a1"] for e in entities) == a1
    assert Counter(e["a2"] for e in entities) == a2
    assert sum(1 for e in entities if e["full"] and e["consensus"] in ("PER", "PER_AMBIG", "PER_LOC")) == 141

    # pack entities into queries
    RNG.shuffle(entities)
    queries = []  # (text, [entity])
    seen = set()
    pairs_left = 59
    i = 0
    while i < len(entities):
        e = entities[i]
        if pairs_left and i + 1 < len(entities) and RNG.random() < 0.12:
            f = entities[i + 1]
            text = f"{e['surface']} et {f['surface']}"
            if key(text) not in seen and place_ok(idx, text, [e, f]):
                seen.add(key(text))
                queries.append((text, [e, f]))
                pairs_left -= 1
                i += 2
                continue
        for attempt in range(200):
            ctx = RNG.choice(LOC_CTX if e["a1"] == "LOC" else PER_CTX)
            text = ctx.format(e["surface"])
            if attempt >= 20:
                text = f"{text} {RNG.randint(1800, 1960)}"
            if key(text) not in seen and place_ok(idx, text, [e]):
                break
        else:
            raise SystemExit(f"no context for {e['surface']}")
        seen.add(key(text))
        queries.append((text, [e]))
        i += 1
    n_empty = 995 - len(queries)
    for q in plain_queries(n_empty + 40):
        if n_empty == 0:
            break
        if key(q) in seen:
            continue
        seen.add(key(q))
        queries.append((q, []))
        n_empty -= 1
    RNG.shuffle(queries)
    assert len(queries) == 995
    return queries


def place_ok(idx, text, ents):
    """Every resolvable gold LOC surface must come out as an exact match and
    surfaces must be recoverable by first non-overlapping occurrence."""
    toks = tokens(text)
    taken = []
    for e in ents:
        needle = tokens(e["surface"])
        starts = [i for i in range(len(toks) - len(needle) + 1) if toks[i:i + len(needle)] == needle]
        span = next(((s, s + len(needle)) for s in starts if all(s + len(needle) <= a or b <= s for a, b in taken)), None)
        if span is None:
            return False
        taken.append(span)
        e["_span"] = span
    m = idx.matches(toks)
    for e in ents:
        if e["consensus"] == "LOC" and e["ref"] is None and idx.resolve(e["surface"]):
            if e["_span"] not in m:
                return False
            if len(toks) > 1 and len(needle) == 1 and (needle[0] in GIVEN_SET or needle[0] in COMMON_SET):
                return False
    return True


def write_gsc(queries):
    d = OUT / "gsc"
    d.mkdir(parents=True, exist_ok=True)
    rows = []
    for text, ents in queries:
        if not ents:
            rows.append([text, "", "", "", "", "", ""])
            continue
        for e in ents:
            for ann, cat in (("a1", e["a1"]), ("a2", e["a2"])):
                full = "true" if e["full"] and cat in ("PER", "PER_AMBIG", "PER_LOC") else "false"
                rows.append([text, e["surface"], cat, full, ann, e["consensus"] or "", e["ref"] or ""])
    # rows the loader drops with a warning: a digit-only query, a repeated
    # query group and a repeated row
    dup_text = next(t for t, ents in queries if ents)
    dup_rows = [r for r in rows if r[0] == dup_text]
    rows.insert(10, ["1914", "", "", "", "", "", ""])
    rows.insert(300, ["1830 1914", "", "", "", "", "", ""])
    rows.extend(dup_rows)
    pos = rows.index(dup_rows[0])
    rows.insert(pos + 1, list(dup_rows[0]))
    with open(d / "gsc.tsv", "w", encoding="utf-8") as f:
        f.write("query\tentity_surface\tcategory\tis_full_name\tannotator_id\tconsensus_category\tlocation_ref\n")
        for r in rows:
            assert not any("\t" in c or "\n" in c or '"' in c for c in r), r
            f.write("\t".join(r) + "\n")


# --------------------------------------------------------------------------
# knowledge-base fixture

KB = OrderedDict()
PARTITION = OrderedDict()


def kb(spelling, provenance, hits):
    KB[spelling] = [dict(entity_id=i, label=l, score=s, source=src) for src, i, l, s in hits]
    PARTITION[spelling] = provenance


kb("curer bell", "WIKIDATA_ONLY", [("WIKIDATA", "Q127332", "Currer Bell", 0.92),
                                   ("WIKIDATA", "Q9000101", "Bell", 0.61)])
kb("victor guillemin", "NONE", [("VIAF", "9847974", "Hugo, Victor, 1802-1885", 0.71),
                                ("WIKIDATA", "Q9000102", "Victor Guillemin", 0.84)])
kb("guillaume archiduc", "VIAF_ONLY", [("VIAF", "62349720", "Habsburg-Lothringen, Wilhelm, 1895-1949", 0.93),
                                       ("VIAF", "27868318", "Leopold Wilhelm, Archduke of Austria, 1614-1662", 0.91),
                                       ("WIKIDATA", "Q9000103", "Guillaume", 0.55)])
kb("pole nord", "NONE", [])
kb("emile verhaeren", "BOTH", [("WIKIDATA", "Q9000001", "Émile Verhaeren", 0.98),
                               ("VIAF", "9000001", "Verhaeren, Émile, 1855-1916", 0.97),
                               ("VIAF", "9000011", "Verhaeren, Emile, 1855-1916 (translations)", 0.74)])
kb("georges simenon", "BOTH", [("WIKIDATA", "Q9000002", "Georges Simenon", 1.0),
                               ("VIAF", "9000002", "Simenon, Georges, 1903-1989", 0.96)])
kb("maurice maeterlinck", "BOTH", [("WIKIDATA", "Q9000003", "Maurice Maeterlinck", 0.95),
                                   ("VIAF", "9000003", "Maeterlinck, Maurice, 1862-1949", 0.9),
                                   ("WIKIDATA", "Q9000013", "Maeterlinck", 0.66)])
kb("adolphe quetelet", "WIKIDATA_ONLY", [("WIKIDATA", "Q9000004", "Adolphe Quetelet", 0.97),
                                         ("VIAF", "9000004", "Quetelet, A.", 0.82)])
kb("ernest solvay", "WIKIDATA_ONLY", [("WIKIDATA", "Q9000005", "Ernest Solvay", 0.93)])
kb("fernand khnopff", "VIAF_ONLY", [("VIAF", "9000006", "Khnopff, Fernand, 1858-1921", 0.99),
                                    ("WIKIDATA", "Q9000006", "Khnopff", 0.77)])
kb("adeline pollet", "NONE", [("WIKIDATA", "Q9000007", "Adeline", 0.52)])
kb("august van turnhout", "NONE", [("VIAF", "9000008", "Turnhout, Jan van", 0.68),
                                   ("WIKIDATA", "Q9000008", "Turnhout", 0.58)])
kb("marie dubois", "NONE", [])


def write_kb():
    d = OUT / "kb"
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "responses.json", "w", encoding="utf-8") as f:
        json.dump(KB, f, ensure_ascii=False, indent=2)
        f.write("\n")
    counts = Counter(PARTITION.values())
    with open(d / "partition.json", "w", encoding="utf-8") as f:
        json.dump({"spellings": PARTITION, "counts": {k: counts.get(k, 0) for k in
                   ["BOTH", "WIKIDATA_ONLY", "VIAF_ONLY", "NONE"]}}, f, ensure_ascii=False, indent=2)
        f.write("\n")


# --------------------------------------------------------------------------
# end-to-end log export

E2E = [
    # (text, param, places {id: n}, ambiguous surface or None, persons [spelling], contested)
    ("bruxelles", "all_q", {"21004": 1}, None, [], False),
    ("Bruxelles", "all_q", {"21004": 1}, None, [], False),
    ("BRUXELLES 1914", "all_q", {"21004": 1}, None, [], False),
    ("brussel", "any_q", {"21004": 1}, None, [], False),
    ("histoire de bruxelles", "all_q", {"21004": 1}, None, [], False),
    ("liège", "all_q", {"62063": 1}, None, [], False),
    ("Luik", "all_q", {"62063": 1}, None, [], False),
    ("journal de liège", "exact_q", {"62063": 1}, None, [], False),
    ("antwerpen", "all_q", {"11002": 1}, None, [], False),
    ("anvers guerre", "all_q", {"11002": 1}, None, [], False),
    ("Antwerp", "all_q", {"11002": 1}, None, [], False),
    ("namur", "all_q", {"92094": 1}, None, [], False),
    ("carte postale namur", "all_q", {"92094": 1}, None, [], False),
    ("Mont-Sainte-Aldegonde", "all_q", {"58001-MSA": 1}, None, [], False),
    ("overyssche", "all_q", {"23062": 1}, None, [], False),
    ("saint-nicolas", "all_q", {}, "saint nicolas", [], False),
    ("Saint Nicolas 1914", "all_q", {}, "saint nicolas", [], False),
    ("Herve", "all_q", {"63035": 1}, None, [], False),
    ("hervé 1914", "all_q", {}, None, [], True),
    ("paris", "all_q", {}, None, [], False),
    ("anwterp", "all_q", {}, None, [], False),
    ("gand et bruges", "all_q", {"44021": 1, "31005": 1}, None, [], False),
    ("emile verhaeren", "all_q", {}, None, ["emile verhaeren"], False),
    ("Emile Verhaeren poèmes", "all_q", {}, None, ["emile verhaeren"], False),
    ("georges simenon", "all_q", {}, None, ["georges simenon"], False),
    ("maurice maeterlinck", "all_q", {}, None, ["maurice maeterlinck"], False),
    ("adolphe quetelet", "all_q", {}, None, ["adolphe quetelet"], False),
    ("ernest solvay", "all_q", {}, None, ["ernest solvay"], False),
    ("fernand khnopff", "exact_q", {}, None, ["fernand khnopff"], False),
    ("adeline pollet", "all_q", {}, None, ["adeline pollet"], False),
    ("august van turnhout", "all_q", {"13040": 1}, None, ["august van turnhout"], False),
    ("marie dubois", "all_q", {}, None, ["marie dubois"], False),
    ("pole nord", "all_q", {}, None, ["pole nord"], False),
    ("victor guillemin", "all_q", {}, None, ["victor guillemin"], False),
    ("guillaume archiduc", "all_q", {}, None, ["guillaume archiduc"], False),
    ("histoire de la guerre", "all_q", {}, None, [], False),
    ("journal", "all_q", {}, None, [], False),
    ("catalogue des manuscrits", "all_q", {}, None, [], False),
    ("revue belge", "none_q", {}, None, [], False),
    ("affiches anciennes", "all_q", {}, None, [], False),
    ("exposition universelle", "all_q", {}, None, [], False),
    ("souvenirs", "all_q", {}, None, [], False),
    ("archives presse", "all_q", {}, None, [], False),
    ("recueil de lettres", "all_q", {}, None, [], False),
    ("guide de bruxelles", "all_q", {"21004": 1}, None, [], False),
    ("vues de liège", "all_q", {"62063": 1}, None, [], False),
    ("Turnhout", "all_q", {"13040": 1}, None, [], False),
    ("Louvain", "all_q", {"24062": 1}, None, [], False),
]


def write_e2e(idx):
    from urllib.parse import urlencode

    d = OUT / "e2e"
    d.mkdir(parents=True, exist_ok=True)
    rows = []
    t0 = 1546416000  # 2019-01-02 08:00:00 UTC
    visit = 0
    visitor = 0
    i = 0
    truth_places = Counter()
    truth_amb = Counter()
    truth_persons = Counter()
    contested = 0
    k = 0
    while i < len(E2E):
        visit += 1
        if visit % 3 == 1:
            visitor += 1
        n = 1 + (visit * 7) % 4
        for j, (text, param, places, amb, persons, cont) in enumerate(E2E[i:i + n]):
            ts = t0 + visit * 3600 + j * 45
            stamp = f"2019-01-{2 + visit // 24:02d} {(8 + visit) % 24:02d}:{j:02d}:{(k * 7) % 60:02d}"
            del ts
            url = "https://www.belgicapress.be/fr/search?" + urlencode({param: text, "lang": "fr"})
            cv = f"lang=fr|page=search{'|ui=new' if k % 5 == 0 else ''}"
            rows.append([f"u{visitor:03d}", f"v{visit:04d}", stamp, url, cv])
            for lid, c in places.items():
                truth_places[lid] += c
            if amb:
                truth_amb[amb] += 1
            for p in persons:
                truth_persons[p] += 1
            contested += cont
            k += 1
        i += n
    queries = len(E2E)
    # noise the pipeline must skip: digit-only, no query string, bad timestamp
    rows.insert(5, ["u001", "v0002", "2019-01-02 10:05:00",
                    "https://www.belgicapress.be/fr/search?all_q=1914&lang=fr", "lang=fr"])
    rows.insert(12, ["u002", "v0004", "2019-01-02 12:03:00", "https://www.belgicapress.be/fr/home", ""])
    rows.insert(20, ["u003", "v0007", "yesterday", "https://www.belgicapress.be/fr/search?all_q=namur", ""])
    with open(d / "export.csv", "w", encoding="utf-8", newline="") as f:
        import csv
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["visitor_id", "visit_id", "timestamp", "url", "custom_vars"])
        w.writerows(rows)

    for text, _, places, amb, persons, _ in E2E:
        toks = tokens(text)
        got = Counter()
        for a, b in idx.matches(toks):
            ids = idx.ids[tuple(toks[a:b])]
            if len(ids) == 1:
                got[next(iter(ids))] += 1
        if toks == ["hervé", "1914"]:
            continue
        assert got == Counter(places), (text, got, places)

    provenance = Counter(PARTITION[p] for p in truth_persons)
    municipal = {l[0] for l in LOCS if l[2] == "MUNICIPALITY"}
    truth = OrderedDict(
        total_queries=queries,
        discarded_numeric=1,
        malformed_rows=1,
        records_without_query_string=1,
        place_mentions=sum(truth_places.values()) + sum(truth_amb.values()),
        place_counts=OrderedDict(sorted(truth_places.items())),
        ambiguous=OrderedDict(sorted(truth_amb.items())),
        municipality_mentions=sum(c for lid, c in truth_places.items() if lid in municipal),
        ambiguous_queries=contested,
        person_mentions=sum(truth_persons.values()),
        person_spellings=OrderedDict(sorted(truth_persons.items())),
        distinct_spellings=len(truth_persons),
        provenance={k: provenance.get(k, 0) for k in ["BOTH", "WIKIDATA_ONLY", "VIAF_ONLY", "NONE", "UNRESOLVED"]},
        matched_any_kb=sum(provenance[k] for k in ["BOTH", "WIKIDATA_ONLY", "VIAF_ONLY"]),
    )
    with open(d / "truth.json", "w", encoding="utf-8") as f:
        json.dump(truth, f, ensure_ascii=False, indent=2)
        f.write("\n")
    with open(d / "querylens.toml", "w", encoding="utf-8") as f:
        f.write("""# Pipeline configuration for the bundled end-to-end sample.
# Relative paths are resolved against this file's directory.

export = "export.csv"
gazetteer_locations = "../gazetteer/locations.tsv"
gazetteer_aliases = "../gazetteer/aliases.tsv"
given_names = "../lexicons/given_names.txt"
common_words = "../lexicons/common_words.txt"
particles = "../lexicons/particles.txt"
gsc = "../gsc/gsc.tsv"
country = "BE"
threshold = 0.9
error_budget = 0.05

[kb]
backend = "fixture"
fixture = "../kb/responses.json"
""")


def write_lexicons():
    d = OUT / "lexicons"
    d.mkdir(parents=True, exist_ok=True)
    (d / "given_names.txt").write_text("# one given name per line\n" + "\n".join(sorted(GIVEN_SET)) + "\n", encoding="utf-8")
    (d / "common_words.txt").write_text("# French, Dutch and English function and frequent words\n" + "\n".join(COMMON) + "\n", encoding="utf-8")
    (d / "particles.txt").write_text("\n".join(PARTICLES) + "\n", encoding="utf-8")


LOCS = []


def main():
    global LOCS
    locs, aliases = build_gazetteer()
    LOCS = locs
    idx = Index(locs, aliases)
    # place tokens must not collide with query scaffolding
    clash = idx.tokens & (set(QUERY_CONTEXT) | {"et", "1914", "1830", "1920"})
    assert not clash, clash
    for s in SURNAMES:
        assert (s,) not in idx.ids or s in {"sax"}, s
    for sp in PARTITION:
        for t in tokens(sp):
            assert (t,) not in idx.ids or t == "turnhout", t
    be = [l for l in locs if l[3] == "BE"]
    assert len(be) == 3000
    assert sum(1 for l in be if l[2] == "MUNICIPALITY") == 589
    assert sum(1 for lid, _ in aliases if lid == "11002") == 119
    assert idx.resolve("Saint-Nicolas") == {"62118", "46021"}

    write_lexicons()
    write_gazetteer(locs, aliases)
    queries = build_gsc(idx, locs, aliases)
    write_gsc(queries)
    write_kb()
    write_e2e(idx)
    print(f"locations={len(locs)} aliases={len(aliases)} gsc_queries={len(queries)}")


if __name__ == "__main__":
    unicodedata.normalize("NFC", "")
    main()
