//! Russian cardinal and ordinal numerals with full case/gender agreement.
//!
//! Rule table:
//!
//! * Numbers are split into groups of three digits (units, тысяча, миллион,
//!   миллиард). Every word of every group is declined in the requested case.
//! * Unit-group agreement follows the requested gender; the тысяча group is
//!   feminine, миллион/миллиард groups are masculine.
//! * A scale group whose value is exactly 1 is spoken as the bare noun
//!   ("тысяча", "миллион"), never "одна тысяча".
//! * Scale noun form: in nominative/accusative it is governed by the group's
//!   last digits (1 → singular, 2–4 → genitive singular, otherwise and for
//!   11–14 → genitive plural); in the oblique cases it takes the requested case,
//!   singular when the group ends in 1 (but not 11), plural otherwise.
//! * Accusative is inanimate (equal to nominative except "одну", "тысячу").
//! * Ordinals: every component except the last non-zero one stays a nominative
//!   cardinal; the last component becomes an ordinal adjective. Whole
//!   thousands fuse into one word ("двухтысячный").

use super::TextNormError;

/// Grammatical case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Case {
    #[default]
    Nominative,
    Genitive,
    Dative,
    Accusative,
    Instrumental,
    Prepositional,
}

impl Case {
    pub const ALL: [Case; 6] = [
        Case::Nominative,
        Case::Genitive,
        Case::Dative,
        Case::Accusative,
        Case::Instrumental,
        Case::Prepositional,
    ];

    fn idx(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Gender {
    #[default]
    Masculine,
    Feminine,
    Neuter,
}

impl Gender {
    pub const ALL: [Gender; 3] = [Gender::Masculine, Gender::Feminine, Gender::Neuter];
}

/// Inflection parameters for a numeral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MorphContext {
    pub case: Case,
    pub gender: Gender,
}

impl MorphContext {
    pub const fn new(case: Case, gender: Gender) -> Self {
        Self { case, gender }
    }
}

/// Largest magnitude accepted by [`number_to_words`].
pub const MAX_CARDINAL: i64 = 999_999_999_999;

/// Largest value accepted by [`ordinal_to_words`].
pub const MAX_ORDINAL: u32 = 9_999;

type Forms = [&'static str; 6];

const ZERO: Forms = ["ноль", "ноля", "нолю", "ноль", "нолём", "ноле"];

const ONE_M: Forms = ["один", "одного", "одному", "один", "одним", "одном"];
const ONE_F: Forms = ["одна", "одной", "одной", "одну", "одной", "одной"];
const ONE_N: Forms = ["одно", "одного", "одному", "одно", "одним", "одном"];
const TWO_MN: Forms = ["два", "двух", "двум", "два", "двумя", "двух"];
const TWO_F: Forms = ["две", "двух", "двум", "две", "двумя", "двух"];

const UNITS: [Forms; 8] = [
    ["три", "трёх", "трём", "три", "тремя", "трёх"],
    ["четыре", "четырёх", "четырём", "четыре", "четырьмя", "четырёх"],
    ["пять", "пяти", "пяти", "пять", "пятью", "пяти"],
    ["шесть", "шести", "шести", "шесть", "шестью", "шести"],
    ["семь", "семи", "семи", "семь", "семью", "семи"],
    ["восемь", "восьми", "восьми", "восемь", "восемью", "восьми"],
    ["девять", "девяти", "девяти", "девять", "девятью", "девяти"],
    ["десять", "десяти", "десяти", "десять", "десятью", "десяти"],
];

const TEENS: [Forms; 9] = [
    ["одиннадцать", "одиннадцати", "одиннадцати", "одиннадцать", "одиннадцатью", "одиннадцати"],
    ["двенадцать", "двенадцати", "двенадцати", "двенадцать", "двенадцатью", "двенадцати"],
    ["тринадцать", "тринадцати", "тринадцати", "тринадцать", "тринадцатью", "тринадцати"],
    ["четырнадцать", "четырнадцати", "четырнадцати", "четырнадцать", "четырнадцатью", "четырнадцати"],
    ["пятнадцать", "пятнадцати", "пятнадцати", "пятнадцать", "пятнадцатью", "пятнадцати"],
    ["шестнадцать", "шестнадцати", "шестнадцати", "шестнадцать", "шестнадцатью", "шестнадцати"],
    ["семнадцать", "семнадцати", "семнадцати", "семнадцать", "семнадцатью", "семнадцати"],
    ["восемнадцать", "восемнадцати", "восемнадцати", "восемнадцать", "восемнадцатью", "восемнадцати"],
    ["девятнадцать", "девятнадцати", "девятнадцати", "девятнадцать", "девятнадцатью", "девятнадцати"],
];

const TENS: [Forms; 8] = [
    ["двадцать", "двадцати", "двадцати", "двадцать", "двадцатью", "двадцати"],
    ["тридцать", "тридцати", "тридцати", "тридцать", "тридцатью", "тридцати"],
    ["сорок", "сорока", "сорока", "сорок", "сорока", "сорока"],
    ["пятьдесят", "пятидесяти", "пятидесяти", "пятьдесят", "пятьюдесятью", "пятидесяти"],
    ["шестьдесят", "шестидесяти", "шестидесяти", "шестьдесят", "шестьюдесятью", "шестидесяти"],
    ["семьдесят", "семидесяти", "семидесяти", "семьдесят", "семьюдесятью", "семидесяти"],
    ["восемьдесят", "восьмидесяти", "восьмидесяти", "восемьдесят", "восемьюдесятью", "восьмидесяти"],
    ["девяносто", "девяноста", "девяноста", "девяносто", "девяноста", "девяноста"],
];

const HUNDREDS: [Forms; 9] = [
    ["сто", "ста", "ста", "сто", "ста", "ста"],
    ["двести", "двухсот", "двумстам", "двести", "двумястами", "двухстах"],
    ["триста", "трёхсот", "трёмстам", "триста", "тремястами", "трёхстах"],
    ["четыреста", "четырёхсот", "четырёмстам", "четыреста", "четырьмястами", "четырёхстах"],
    ["пятьсот", "пятисот", "пятистам", "пятьсот", "пятьюстами", "пятистах"],
    ["шестьсот", "шестисот", "шестистам", "шестьсот", "шестьюстами", "шестистах"],
    ["семьсот", "семисот", "семистам", "семьсот", "семьюстами", "семистах"],
    ["восемьсот", "восьмисот", "восьмистам", "восемьсот", "восемьюстами", "восьмистах"],
    ["девятьсот", "девятисот", "девятистам", "девятьсот", "девятьюстами", "девятистах"],
];

/// Singular and plural case forms of a scale noun, plus its gender.
struct Scale {
    singular: Forms,
    plural: Forms,
    gender: Gender,
}

const SCALES: [Scale; 3] = [
    Scale {
        singular: ["тысяча", "тысячи", "тысяче", "тысячу", "тысячей", "тысяче"],
        plural: ["тысячи", "тысяч", "тысячам", "тысячи", "тысячами", "тысячах"],
        gender: Gender::Feminine,
    },
    Scale {
        singular: ["миллион", "миллиона", "миллиону", "миллион", "миллионом", "миллионе"],
        plural: ["миллионы", "миллионов", "миллионам", "миллионы", "миллионами", "миллионах"],
        gender: Gender::Masculine,
    },
    Scale {
        singular: ["миллиард", "миллиарда", "миллиарду", "миллиард", "миллиардом", "миллиарде"],
        plural: ["миллиарды", "миллиардов", "миллиардам", "миллиарды", "миллиардами", "миллиардах"],
        gender: Gender::Masculine,
    },
];

fn unit_word(d: u32, case: Case, gender: Gender) -> &'static str {
    let forms = match (d, gender) {
        (1, Gender::Masculine) => &ONE_M,
        (1, Gender::Feminine) => &ONE_F,
        (1, Gender::Neuter) => &ONE_N,
        (2, Gender::Feminine) => &TWO_F,
        (2, _) => &TWO_MN,
        (3..=10, _) => &UNITS[d as usize - 3],
        _ => unreachable!("unit digit {d}"),
    };
    forms[case.idx()]
}

/// Pushes the cardinal words of `g` in 1..=999.
fn group_words(g: u32, case: Case, gender: Gender, out: &mut Vec<&'static str>) {
    debug_assert!((1..1000).contains(&g));
    let hundreds = g / 100;
    let rest = g % 100;
    if hundreds > 0 {
        out.push(HUNDREDS[hundreds as usize - 1][case.idx()]);
    }
    match rest {
        0 => {}
        1..=10 => out.push(unit_word(rest, case, gender)),
        11..=19 => out.push(TEENS[rest as usize - 11][case.idx()]),
        _ => {
            out.push(TENS[(rest / 10) as usize - 2][case.idx()]);
            if !rest.is_multiple_of(10) {
                out.push(unit_word(rest % 10, case, gender));
            }
        }
    }
}

fn scale_noun(scale: &Scale, g: u32, case: Case) -> &'static str {
    let last_two = g % 100;
    let last = g % 10;
    match case {
        Case::Nominative | Case::Accusative => {
            if (11..=14).contains(&last_two) {
                scale.plural[Case::Genitive.idx()]
            } else {
                match last {
                    1 => scale.singular[case.idx()],
                    2..=4 => scale.singular[Case::Genitive.idx()],
                    _ => scale.plural[Case::Genitive.idx()],
                }
            }
        }
        _ => {
            if last == 1 && last_two != 11 {
                scale.singular[case.idx()]
            } else {
                scale.plural[case.idx()]
            }
        }
    }
}

/// Pushes the words for a non-negative `n` below 10^12 (without the minus sign).
fn cardinal_words(n: u64, ctx: MorphContext, out: &mut Vec<&'static str>) {
    if n == 0 {
        out.push(ZERO[ctx.case.idx()]);
        return;
    }
    let groups = [
        ((n / 1_000_000_000) % 1000) as u32,
        ((n / 1_000_000) % 1000) as u32,
        ((n / 1000) % 1000) as u32,
    ];
    for (scale_idx, &g) in groups.iter().enumerate() {
        if g == 0 {
            continue;
        }
        let scale = &SCALES[2 - scale_idx];
        if g != 1 {
            group_words(g, ctx.case, scale.gender, out);
        }
        out.push(scale_noun(scale, g, ctx.case));
    }
    let units = (n % 1000) as u32;
    if units > 0 {
        group_words(units, ctx.case, ctx.gender, out);
    }
}

/// Russian cardinal wording of `n` in the requested case and gender.
pub fn number_to_words(n: i64, ctx: MorphContext) -> Result<String, TextNormError> {
    if !(-MAX_CARDINAL..=MAX_CARDINAL).contains(&n) {
        return Err(TextNormError::OutOfRange(n.to_string()));
    }
    let mut words = Vec::with_capacity(12);
    if n < 0 {
        words.push("минус");
    }
    cardinal_words(n.unsigned_abs(), ctx, &mut words);
    Ok(words.join(" "))
}

/// How an ordinal stem takes adjective endings.
#[derive(Clone, Copy)]
enum Decl {
    /// -ый, -ого, ... (первый)
    Hard,
    /// -ой in masculine nominative, otherwise hard (второй)
    Stressed,
    /// третий
    Soft,
}

const HARD_ENDINGS: [Forms; 3] = [
    ["ый", "ого", "ому", "ый", "ым", "ом"],
    ["ая", "ой", "ой", "ую", "ой", "ой"],
    ["ое", "ого", "ому", "ое", "ым", "ом"],
];

const SOFT_ENDINGS: [Forms; 3] = [
    ["ий", "ьего", "ьему", "ий", "ьим", "ьем"],
    ["ья", "ьей", "ьей", "ью", "ьей", "ьей"],
    ["ье", "ьего", "ьему", "ье", "ьим", "ьем"],
];

fn decline(stem: &str, decl: Decl, ctx: MorphContext) -> String {
    let g = ctx.gender as usize;
    let c = ctx.case.idx();
    let ending = match decl {
        Decl::Soft => SOFT_ENDINGS[g][c],
        Decl::Stressed
            if ctx.gender == Gender::Masculine
                && matches!(ctx.case, Case::Nominative | Case::Accusative) =>
        {
            "ой"
        }
        Decl::Hard | Decl::Stressed => HARD_ENDINGS[g][c],
    };
    format!("{stem}{ending}")
}

const UNIT_ORD: [(&str, Decl); 9] = [
    ("перв", Decl::Hard),
    ("втор", Decl::Stressed),
    ("трет", Decl::Soft),
    ("четвёрт", Decl::Hard),
    ("пят", Decl::Hard),
    ("шест", Decl::Stressed),
    ("седьм", Decl::Stressed),
    ("восьм", Decl::Stressed),
    ("девят", Decl::Hard),
];

const TEEN_ORD: [&str; 10] = [
    "десят",
    "одиннадцат",
    "двенадцат",
    "тринадцат",
    "четырнадцат",
    "пятнадцат",
    "шестнадцат",
    "семнадцат",
    "восемнадцат",
    "девятнадцат",
];

const TENS_ORD: [(&str, Decl); 8] = [
    ("двадцат", Decl::Hard),
    ("тридцат", Decl::Hard),
    ("сороков", Decl::Stressed),
    ("пятидесят", Decl::Hard),
    ("шестидесят", Decl::Hard),
    ("семидесят", Decl::Hard),
    ("восьмидесят", Decl::Hard),
    ("девяност", Decl::Hard),
];

const HUNDREDS_ORD: [&str; 9] = [
    "сот",
    "двухсот",
    "трёхсот",
    "четырёхсот",
    "пятисот",
    "шестисот",
    "семисот",
    "восьмисот",
    "девятисот",
];

/// Genitive combining forms used in fused "N-тысячный" ordinals.
const THOUSAND_PREFIX: [&str; 9] = [
    "", "двух", "трёх", "четырёх", "пяти", "шести", "семи", "восьми", "девяти",
];

/// Russian ordinal wording of `n` (0..=9999), declined as an adjective.
pub fn ordinal_to_words(n: u32, ctx: MorphContext) -> Result<String, TextNormError> {
    if n > MAX_ORDINAL {
        return Err(TextNormError::OutOfRange(n.to_string()));
    }
    if n == 0 {
        return Ok(decline("нулев", Decl::Stressed, ctx));
    }
    let thousands = n / 1000;
    let rest = n % 1000;
    if rest == 0 {
        let stem = format!("{}тысячн", THOUSAND_PREFIX[thousands as usize - 1]);
        return Ok(decline(&stem, Decl::Hard, ctx));
    }

    let nominative = MorphContext::default();
    let mut words: Vec<String> = Vec::with_capacity(5);
    if thousands > 0 {
        let mut prefix = Vec::new();
        cardinal_words(u64::from(thousands) * 1000, nominative, &mut prefix);
        words.extend(prefix.into_iter().map(str::to_string));
    }
    let hundreds = rest / 100;
    let tail = rest % 100;
    if tail == 0 {
        words.push(decline(HUNDREDS_ORD[hundreds as usize - 1], Decl::Hard, ctx));
        return Ok(words.join(" "));
    }
    if hundreds > 0 {
        words.push(HUNDREDS[hundreds as usize - 1][0].to_string());
    }
    let last = match tail {
        1..=9 => {
            let (stem, decl) = UNIT_ORD[tail as usize - 1];
            decline(stem, decl, ctx)
        }
        10..=19 => decline(TEEN_ORD[tail as usize - 10], Decl::Hard, ctx),
        _ if tail.is_multiple_of(10) => {
            let (stem, decl) = TENS_ORD[(tail / 10) as usize - 2];
            decline(stem, decl, ctx)
        }
        _ => {
            words.push(TENS[(tail / 10) as usize - 2][0].to_string());
            let (stem, decl) = UNIT_ORD[(tail % 10) as usize - 1];
            decline(stem, decl, ctx)
        }
    };
    words.push(last);
    Ok(words.join(" "))
}

/// Genitive month names, January first.
pub const MONTHS_GENITIVE: [&str; 12] = [
    "января",
    "февраля",
    "марта",
    "апреля",
    "мая",
    "июня",
    "июля",
    "августа",
    "сентября",
    "октября",
    "ноября",
    "декабря",
];

fn is_leap(year: u32) -> bool {
    (year.is_multiple_of(4) && !year.is_multiple_of(100)) || year.is_multiple_of(400)
}

pub fn days_in_month(month: u32, year: u32) -> Option<u32> {
    Some(match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap(year) => 29,
        2 => 28,
        _ => return None,
    })
}

/// "девятое мая тысяча девятьсот сорок пятого года" for 9.5.1945.
///
/// Proleptic Gregorian calendar, years 1..=9999.
pub fn date_to_words(day: u32, month: u32, year: u32) -> Result<String, TextNormError> {
    let invalid = TextNormError::InvalidDate { day, month, year };
    if !(1..=MAX_ORDINAL).contains(&year) {
        return Err(invalid);
    }
    match days_in_month(month, year) {
        Some(max_day) if (1..=max_day).contains(&day) => {}
        _ => return Err(invalid),
    }
    let day_words = ordinal_to_words(day, MorphContext::new(Case::Nominative, Gender::Neuter))?;
    let year_words = ordinal_to_words(year, MorphContext::new(Case::Genitive, Gender::Masculine))?;
    Ok(format!(
        "{day_words} {} {year_words} года",
        MONTHS_GENITIVE[month as usize - 1]
    ))
}
