use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Universal part-of-speech tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Pos {
    Noun,
    Verb,
    Adj,
    Adv,
    Pron,
    Det,
    Adp,
    Conj,
    Num,
    Part,
    Intj,
    Aux,
    X,
}

impl Pos {
    pub fn parse(tag: &str) -> Option<Self> {
        Some(match tag.trim().to_ascii_uppercase().as_str() {
            "NOUN" | "PROPN" => Pos::Noun,
            "VERB" => Pos::Verb,
            "ADJ" => Pos::Adj,
            "ADV" => Pos::Adv,
            "PRON" => Pos::Pron,
            "DET" => Pos::Det,
            "ADP" => Pos::Adp,
            "CONJ" | "CCONJ" | "SCONJ" => Pos::Conj,
            "NUM" => Pos::Num,
            "PART" => Pos::Part,
            "INTJ" => Pos::Intj,
            "AUX" => Pos::Aux,
            "X" => Pos::X,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaEntry {
    pub lemma: String,
    pub pos: Pos,
}

/// Lemma and part-of-speech lookup for single lowercase tokens.
pub trait Lemmatizer {
    fn analyze(&self, token: &str) -> Result<LemmaEntry>;
}

// lemma POS inflected-forms...
const BUILTIN_LEXICON: &str = "
i PRON me my mine myself
we PRON us our ours ourselves
you PRON your yours yourself yourselves
he PRON him his himself
she PRON her hers herself
it PRON its itself
they PRON them their theirs themselves
this PRON these
that PRON those
who PRON whom whose
what PRON
which PRON
someone PRON somebody anyone anybody everyone everybody nobody noone
something PRON anything everything nothing
the DET
a DET an
every DET
each DET
either DET neither
another DET
some DET
any DET
no DET
all DET
both DET
of ADP
in ADP
on ADP
at ADP
by ADP
for ADP
with ADP
about ADP
against ADP
between ADP
into ADP
through ADP
during ADP
before ADP
after ADP
above ADP
below ADP
from ADP
under ADP
over ADP
among ADP
without ADP
within ADP
toward ADP towards
upon ADP
via ADP
and CONJ
but CONJ
or CONJ
nor CONJ
because CONJ
although CONJ though
unless CONJ
whether CONJ
while CONJ whilst
if CONJ
than CONJ
to PART
not PART
oh INTJ
yeah INTJ yep yup
hey INTJ
lol INTJ lmao rofl
wow INTJ
okay INTJ ok
hmm INTJ
ugh INTJ
thanks INTJ thx
one NUM
two NUM
three NUM
four NUM
five NUM
six NUM
seven NUM
eight NUM
nine NUM
ten NUM
hundred NUM hundreds
thousand NUM thousands
million NUM millions
be AUX am is are was were been being
have AUX has had having
do AUX does did done doing
will AUX would
can AUX could
shall AUX should
may AUX might
must AUX
run VERB runs ran running
go VERB goes went gone going
make VERB makes made making
take VERB takes took taken taking
get VERB gets got gotten getting
see VERB sees saw seen seeing
come VERB comes came coming
know VERB knows knew known knowing
think VERB thinks thought thinking
say VERB says said saying
give VERB gives gave given giving
find VERB finds found finding
tell VERB tells told telling
become VERB becomes became becoming
leave VERB leaves left leaving
feel VERB feels felt feeling
bring VERB brings brought bringing
begin VERB begins began begun beginning
keep VERB keeps kept keeping
hold VERB holds held holding
write VERB writes wrote written writing
stand VERB stands stood standing
hear VERB hears heard hearing
let VERB lets letting
mean VERB means meant meaning
set VERB sets setting
meet VERB meets met meeting
pay VERB pays paid paying
sit VERB sits sat sitting
speak VERB speaks spoke spoken speaking
lie VERB lies lay lain lying
lead VERB leads led leading
read VERB reads reading
grow VERB grows grew grown growing
lose VERB loses lost losing
fall VERB falls fell fallen falling
send VERB sends sent sending
build VERB builds built building
understand VERB understands understood understanding
draw VERB draws drew drawn drawing
break VERB breaks broke broken breaking
spend VERB spends spent spending
cut VERB cuts cutting
rise VERB rises rose risen rising
drive VERB drives drove driven driving
buy VERB buys bought buying
wear VERB wears wore worn wearing
choose VERB chooses chose chosen choosing
eat VERB eats ate eaten eating
drink VERB drinks drank drunk drinking
sleep VERB sleeps slept sleeping
teach VERB teaches taught teaching
catch VERB catches caught catching
fight VERB fights fought fighting
throw VERB throws threw thrown throwing
win VERB wins won winning
forget VERB forgets forgot forgotten forgetting
sell VERB sells sold selling
seek VERB seeks sought seeking
feed VERB feeds fed feeding
shoot VERB shoots shot shooting
fly VERB flies flew flown flying
hide VERB hides hid hidden hiding
ride VERB rides rode ridden riding
shake VERB shakes shook shaken shaking
steal VERB steals stole stolen stealing
swim VERB swims swam swum swimming
wake VERB wakes woke woken waking
put VERB puts putting
hit VERB hits hitting
hurt VERB hurts hurting
quit VERB quits quitting
play VERB plays played playing
work VERB works worked working
use VERB uses used using
try VERB tries tried trying
ask VERB asks asked asking
need VERB needs needed needing
want VERB wants wanted wanting
help VERB helps helped helping
start VERB starts started starting
stop VERB stops stopped stopping
look VERB looks looked looking
seem VERB seems seemed seeming
talk VERB talks talked talking
call VERB calls called calling
move VERB moves moved moving
live VERB lives lived living
believe VERB believes believed believing
happen VERB happens happened happening
study VERB studies studied studying
learn VERB learns learned learnt learning
change VERB changes changed changing
love VERB loves loved loving
like VERB likes liked liking
hate VERB hates hated hating
die VERB dies died dying
test VERB tests tested testing
train VERB trains trained training
good ADJ better best
bad ADJ worse worst
big ADJ bigger biggest
small ADJ smaller smallest
large ADJ larger largest
high ADJ higher highest
low ADJ lower lowest
new ADJ newer newest
old ADJ older oldest
great ADJ greater greatest
long ADJ longer longest
easy ADJ easier easiest
hard ADJ harder hardest
happy ADJ happier happiest
little ADJ less least
much ADJ
many ADJ
well ADV
very ADV
really ADV
always ADV
never ADV
often ADV
sometimes ADV
also ADV
still ADV
already ADV
again ADV
almost ADV
quickly ADV
actually ADV
probably ADV
maybe ADV
usually ADV
recently ADV
person NOUN people persons
child NOUN children
man NOUN men
woman NOUN women
foot NOUN feet
tooth NOUN teeth
mouse NOUN mice
life NOUN lives
wife NOUN wives
knife NOUN knives
analysis NOUN analyses
crisis NOUN crises
thesis NOUN theses
news NOUN
virus NOUN viruses
bus NOUN buses
class NOUN classes
process NOUN processes
business NOUN businesses
apple NOUN apples
game NOUN games
gamer NOUN gamers
model NOUN models
topic NOUN topics
";

/// Dictionary lemmatizer: explicit form→lemma entries, with a conservative
/// plural rule and a NOUN tag for words the dictionary does not know.
#[derive(Debug, Clone)]
pub struct DictionaryLemmatizer {
    entries: HashMap<String, LemmaEntry>,
    plural_rule: bool,
}

impl DictionaryLemmatizer {
    pub fn empty() -> Self {
        Self {
            entries: HashMap::new(),
            plural_rule: false,
        }
    }

    pub fn builtin() -> Self {
        let mut lem = Self {
            entries: HashMap::new(),
            plural_rule: true,
        };
        for line in BUILTIN_LEXICON.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let mut parts = line.split_whitespace();
            let (Some(lemma), Some(tag)) = (parts.next(), parts.next()) else {
                continue;
            };
            let pos = Pos::parse(tag).expect("builtin lexicon tag");
            for form in std::iter::once(lemma).chain(parts) {
                lem.entries.entry(form.to_string()).or_insert_with(|| LemmaEntry {
                    lemma: lemma.to_string(),
                    pos,
                });
            }
        }
        lem
    }

    pub fn with_plural_rule(mut self, enabled: bool) -> Self {
        self.plural_rule = enabled;
        self
    }

    pub fn insert(&mut self, form: &str, lemma: &str, pos: Pos) {
        self.entries.insert(
            form.to_string(),
            LemmaEntry {
                lemma: lemma.to_string(),
                pos,
            },
        );
    }

    /// Layers a `form<TAB>lemma<TAB>POS` file over the current entries.
    pub fn with_lexicon_file(mut self, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Backend {
            stage: "lemmatize",
            reason: format!("{}: {e}", path.display()),
        })?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let pos = match cols.as_slice() {
                [_, _, tag] => Pos::parse(tag),
                _ => None,
            };
            let Some(pos) = pos else {
                return Err(Error::Backend {
                    stage: "lemmatize",
                    reason: format!("{}:{}: expected form, lemma and POS", path.display(), lineno + 1),
                });
            };
            self.insert(&cols[0].to_lowercase(), &cols[1].to_lowercase(), pos);
        }
        Ok(self)
    }

    fn singular(token: &str) -> Option<String> {
        let n = token.chars().count();
        if n > 4 && token.ends_with("ies") {
            return Some(format!("{}y", &token[..token.len() - 3]));
        }
        if n > 3
            && token.ends_with('s')
            && !["ss", "us", "is", "ous"].iter().any(|suf| token.ends_with(suf))
        {
            return Some(token[..token.len() - 1].to_string());
        }
        None
    }
}

impl Lemmatizer for DictionaryLemmatizer {
    fn analyze(&self, token: &str) -> Result<LemmaEntry> {
        if let Some(entry) = self.entries.get(token) {
            return Ok(entry.clone());
        }
        if self.plural_rule && !token.contains('_') {
            if let Some(single) = Self::singular(token) {
                if let Some(entry) = self.entries.get(&single) {
                    return Ok(entry.clone());
                }
                return Ok(LemmaEntry {
                    lemma: single,
                    pos: Pos::Noun,
                });
            }
        }
        Ok(LemmaEntry {
            lemma: token.to_string(),
            pos: Pos::Noun,
        })
    }
}

/// Replaces each token by its lemma, dropping tokens whose tag is not allowed.
pub fn lemmatize(tokens: &[String], backend: &dyn Lemmatizer, allowed: &BTreeSet<Pos>) -> Result<Vec<String>> {
    let mut out = Vec::with_capacity(tokens.len());
    for t in tokens {
        let entry = backend.analyze(t)?;
        if allowed.contains(&entry.pos) {
            out.push(entry.lemma);
        }
    }
    Ok(out)
}
