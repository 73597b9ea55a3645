//! A conservative chemical-composition recognizer.
//!
//! Accepts tokens such as `Bi2Te3`, `CaCu3-xCoxTi4O12`, `AlxGa1-xAs` or
//! `Ca5(PO4)3OH`: element symbols, each with an optional numeric or algebraic
//! subscript, optionally grouped in parentheses. It is a gate for the
//! formula-exactness scoring rule, not a chemistry parser.

const ELEMENTS: [&str; 118] = [
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl", "Ar", "K", "Ca",
    "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",
    "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce",
    "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir",
    "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U", "Np", "Pu", "Am", "Cm",
    "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc",
    "Lv", "Ts", "Og",
];

const VARIABLES: [char; 4] = ['x', 'y', 'z', 'δ'];

#[cfg(test)]
fn element_symbols() -> &'static [&'static str] {
    &ELEMENTS
}

/// True iff `word` is entirely a chemical composition.
pub fn contains_stoichiometry(word: &str) -> bool {
    let chars: Vec<char> = word.chars().collect();
    !chars.is_empty() && sequence(&chars, 0, 0).is_some_and(|end| end == chars.len())
}

// Parses one or more groups starting at `pos`, trying every split point so a
// shorter element symbol can win when the longer reading leads nowhere.
// Returns the end offset of a parse that reaches the end of the token or a
// closing parenthesis at `depth > 0`.
fn sequence(s: &[char], pos: usize, depth: usize) -> Option<usize> {
    for after_group in group(s, pos, depth) {
        let after = subscripts(s, after_group);
        for end in after.into_iter().rev() {
            if end == s.len() || (depth > 0 && s[end] == ')') {
                return Some(end);
            }
            if let Some(done) = sequence(s, end, depth) {
                return Some(done);
            }
        }
    }
    None
}

// Possible end offsets of a single element symbol or parenthesized group.
fn group(s: &[char], pos: usize, depth: usize) -> Vec<usize> {
    let mut ends = Vec::new();
    let Some(&c) = s.get(pos) else { return ends };
    if c == '(' && depth == 0 {
        if let Some(close) = sequence(s, pos + 1, depth + 1) {
            if s.get(close) == Some(&')') {
                ends.push(close + 1);
            }
        }
    } else if c.is_ascii_uppercase() {
        if let Some(&next) = s.get(pos + 1) {
            if next.is_ascii_lowercase() && is_element(&[c, next]) {
                ends.push(pos + 2);
            }
        }
        if is_element(&[c]) {
            ends.push(pos + 1);
        }
    }
    ends
}

fn is_element(chars: &[char]) -> bool {
    let sym: String = chars.iter().collect();
    ELEMENTS.contains(&sym.as_str())
}

// All offsets reachable by reading an optional subscript at `pos`, shortest
// first. Subscripts are sums and differences of terms, where a term is a
// number, a variable, or a number times a variable.
fn subscripts(s: &[char], pos: usize) -> Vec<usize> {
    let mut ends = vec![pos];
    let mut cur = match term(s, pos) {
        Some(end) => end,
        None => return ends,
    };
    ends.push(cur);
    while let Some(&op) = s.get(cur) {
        if op != '+' && op != '-' {
            break;
        }
        match term(s, cur + 1) {
            Some(end) => {
                cur = end;
                ends.push(cur);
            }
            None => break,
        }
    }
    ends
}

fn term(s: &[char], pos: usize) -> Option<usize> {
    let mut cur = pos;
    let digits_start = cur;
    while s.get(cur).is_some_and(char::is_ascii_digit) {
        cur += 1;
    }
    if s.get(cur) == Some(&'.') && s.get(cur + 1).is_some_and(char::is_ascii_digit) {
        cur += 1;
        while s.get(cur).is_some_and(char::is_ascii_digit) {
            cur += 1;
        }
    }
    if s.get(cur).is_some_and(|c| VARIABLES.contains(c)) {
        cur += 1;
    }
    (cur > digits_start).then_some(cur)
}
