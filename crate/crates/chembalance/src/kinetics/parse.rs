//! Mechanism file parser.
//!
//! Line-oriented text format with four sections:
//!
//! ```text
//! ELEMENTS
//! H 1.008
//! SPECIES
//! # name  elem:count ...  Tlow Tmid Thigh  a1..a7(low)  a1..a7(high)
//! H2  H:2  200 1000 3500  2.34 ... 0.68  3.33 ... -3.20
//! REACTIONS
//! # equation  A  b  Ea   (A in mol-cm3-s units, Ea in cal/mol)
//! H + O2 <=> O + OH   3.547e15  -0.406  16599
//! # third-body reactions carry a trailing M( name:eff ... ) clause;
//! # unlisted species default to efficiency 1.
//! H2 <=> H + H   4.577e19  -1.40  104380   M( H2:2.5 H2O:12 )
//! STREAMS
//! fuel H2:1.0
//! oxidizer O2:0.233 N2:0.767
//! ```
//!
//! `<=>` marks reversible reactions, `=>` irreversible. Whitespace
//! separates tokens; `#` starts a comment. Repeated species on one side
//! of an equation accumulate their stoichiometric coefficient.

use super::{
    thermo, Element, KineticsError, Mechanism, NasaPoly, ReactionSpec, SpeciesSpec,
};
use std::collections::HashMap;

fn err(line: usize, msg: impl Into<String>) -> KineticsError {
    KineticsError::Parse { line, msg: msg.into() }
}

/// Parse and fully validate a mechanism from its text content.
pub fn parse_mechanism(text: &str) -> Result<Mechanism, KineticsError> {
    #[derive(PartialEq, Clone, Copy)]
    enum Section {
        None,
        Elements,
        Species,
        Reactions,
        Streams,
    }

    let mut section = Section::None;
    let mut elements: Vec<Element> = Vec::new();
    let mut species: Vec<SpeciesSpec> = Vec::new();
    let mut raw_reactions: Vec<(usize, String)> = Vec::new();
    let mut streams: HashMap<String, Vec<(String, f64)>> = HashMap::new();
    let mut elem_index: HashMap<String, usize> = HashMap::new();

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line {
            "ELEMENTS" => {
                section = Section::Elements;
                continue;
            }
            "SPECIES" => {
                section = Section::Species;
                continue;
            }
            "REACTIONS" => {
                section = Section::Reactions;
                continue;
            }
            "STREAMS" => {
                section = Section::Streams;
                continue;
            }
            _ => {}
        }
        match section {
            Section::None => return Err(err(lineno, "content before any section header")),
            Section::Elements => {
                let mut it = line.split_whitespace();
                let symbol = it.next().unwrap().to_string();
                let w: f64 = it
                    .next()
                    .ok_or_else(|| err(lineno, "element needs `symbol weight`"))?
                    .parse()
                    .map_err(|_| err(lineno, "bad atomic weight"))?;
                if w <= 0.0 {
                    return Err(err(lineno, "atomic weight must be positive"));
                }
                if elem_index.contains_key(&symbol) {
                    return Err(err(lineno, format!("duplicate element `{symbol}`")));
                }
                elem_index.insert(symbol.clone(), elements.len());
                elements.push(Element { symbol, atomic_weight: w });
            }
            Section::Species => {
                species.push(parse_species_line(line, lineno, &elem_index, &elements)?);
            }
            Section::Reactions => raw_reactions.push((lineno, line.to_string())),
            Section::Streams => {
                let mut it = line.split_whitespace();
                let name = it.next().unwrap().to_string();
                if name != "fuel" && name != "oxidizer" {
                    return Err(err(lineno, "stream must be `fuel` or `oxidizer`"));
                }
                let mut comp = Vec::new();
                for tok in it {
                    let (sp, y) = tok
                        .split_once(':')
                        .ok_or_else(|| err(lineno, "stream entries are `species:Y`"))?;
                    let y: f64 =
                        y.parse().map_err(|_| err(lineno, "bad stream mass fraction"))?;
                    comp.push((sp.to_string(), y));
                }
                streams.insert(name, comp);
            }
        }
    }

    if species.is_empty() {
        return Err(KineticsError::Invalid("mechanism declares no species".into()));
    }
    let mut seen = HashMap::new();
    for (i, s) in species.iter().enumerate() {
        if seen.insert(s.name.clone(), i).is_some() {
            return Err(KineticsError::Invalid(format!("duplicate species `{}`", s.name)));
        }
    }
    let species_index = Mechanism::build_index(&species);

    let mut reactions = Vec::new();
    for (lineno, line) in raw_reactions {
        reactions.push(parse_reaction_line(&line, lineno, &species_index, &species, &elements)?);
    }

    let stream_vec = |name: &str| -> Result<Vec<f64>, KineticsError> {
        let mut y = vec![0.0; species.len()];
        if let Some(comp) = streams.get(name) {
            for (sp, v) in comp {
                let idx = species_index
                    .get(sp)
                    .copied()
                    .ok_or_else(|| KineticsError::UnknownSpecies(sp.clone()))?;
                y[idx] += v;
            }
            let sum: f64 = y.iter().sum();
            if (sum - 1.0).abs() > 1e-10 {
                return Err(KineticsError::StreamSum { stream: name.into(), sum });
            }
        } else if name == "fuel" {
            y[0] = 1.0;
        } else {
            y[species.len() - 1] = 1.0;
        }
        Ok(y)
    };
    let fuel_stream = stream_vec("fuel")?;
    let oxidizer_stream = stream_vec("oxidizer")?;

    // beta(Y) = sum_i (2 nC + nH/2 - nO)_i / W_i * Y_i; the element
    // atomic weights cancel out of the Bilger coupling function.
    let weight_of = |sym: &str| elem_index.get(sym).copied();
    let (ic, ih, io) = (weight_of("C"), weight_of("H"), weight_of("O"));
    let mut bilger_coef = vec![0.0; species.len()];
    for (i, s) in species.iter().enumerate() {
        let mut num = 0.0;
        for &(e, n) in &s.composition {
            if Some(e) == ic {
                num += 2.0 * n as f64;
            } else if Some(e) == ih {
                num += 0.5 * n as f64;
            } else if Some(e) == io {
                num -= n as f64;
            }
        }
        bilger_coef[i] = num / s.molecular_weight;
    }
    let beta = |y: &[f64]| y.iter().zip(&bilger_coef).map(|(a, b)| a * b).sum::<f64>();
    let beta_fuel = beta(&fuel_stream);
    let beta_ox = beta(&oxidizer_stream);

    Ok(Mechanism {
        elements,
        species,
        reactions,
        fuel_stream,
        oxidizer_stream,
        species_index,
        bilger_coef,
        beta_fuel,
        beta_ox,
    })
}

fn parse_species_line(
    line: &str,
    lineno: usize,
    elem_index: &HashMap<String, usize>,
    elements: &[Element],
) -> Result<SpeciesSpec, KineticsError> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    let name = toks[0].to_string();
    let mut composition = Vec::new();
    let mut i = 1;
    while i < toks.len() && toks[i].contains(':') {
        let (e, n) = toks[i].split_once(':').unwrap();
        let idx = elem_index
            .get(e)
            .copied()
            .ok_or_else(|| err(lineno, format!("unknown element `{e}`")))?;
        let n: u32 = n.parse().map_err(|_| err(lineno, "bad atom count"))?;
        composition.push((idx, n));
        i += 1;
    }
    let nums: Vec<f64> = toks[i..]
        .iter()
        .map(|t| t.parse().map_err(|_| err(lineno, format!("bad number `{t}`"))))
        .collect::<Result<_, _>>()?;
    if nums.len() != 17 {
        return Err(err(
            lineno,
            format!("species `{name}` needs Tlow Tmid Thigh plus 14 coefficients, got {} numbers", nums.len()),
        ));
    }
    let (t_low, t_mid, t_high) = (nums[0], nums[1], nums[2]);
    if !(t_low < t_mid && t_mid < t_high) {
        return Err(err(lineno, format!("species `{name}`: need Tlow < Tmid < Thigh")));
    }
    let mut low = [0.0; 7];
    let mut high = [0.0; 7];
    low.copy_from_slice(&nums[3..10]);
    high.copy_from_slice(&nums[10..17]);
    let molecular_weight: f64 = composition
        .iter()
        .map(|&(e, n)| elements[e].atomic_weight * n as f64)
        .sum();
    if molecular_weight <= 0.0 {
        return Err(err(lineno, format!("species `{name}` has no elemental composition")));
    }
    let sp = SpeciesSpec {
        name: name.clone(),
        composition,
        molecular_weight,
        thermo: NasaPoly { t_low, t_mid, t_high, low, high },
    };
    // Continuity of cp, h, s across the range switch, 0.1% relative.
    for (prop, f) in [
        ("cp", thermo::cp_from as fn(&[f64; 7], f64) -> f64),
        ("h", thermo::h_from),
        ("s", thermo::s_from),
    ] {
        let lo = f(&sp.thermo.low, t_mid);
        let hi = f(&sp.thermo.high, t_mid);
        let scale = lo.abs().max(hi.abs()).max(1e-300);
        if (lo - hi).abs() / scale > 1e-3 {
            return Err(KineticsError::ThermoDiscontinuity {
                species: name,
                property: prop,
                low: lo,
                high: hi,
            });
        }
    }
    Ok(sp)
}

fn parse_side(
    side: &str,
    lineno: usize,
    species_index: &HashMap<String, usize>,
) -> Result<Vec<(usize, u32)>, KineticsError> {
    let mut stoich: Vec<(usize, u32)> = Vec::new();
    for name in side.split('+').map(str::trim) {
        if name.is_empty() {
            return Err(err(lineno, "empty species in reaction equation"));
        }
        let idx = species_index
            .get(name)
            .copied()
            .ok_or_else(|| KineticsError::UnknownSpecies(name.to_string()))?;
        match stoich.iter_mut().find(|(i, _)| *i == idx) {
            Some((_, n)) => *n += 1,
            None => stoich.push((idx, 1)),
        }
    }
    Ok(stoich)
}

fn parse_reaction_line(
    line: &str,
    lineno: usize,
    species_index: &HashMap<String, usize>,
    species: &[SpeciesSpec],
    elements: &[Element],
) -> Result<ReactionSpec, KineticsError> {
    // Optional trailing third-body clause `M( name:eff ... )`.
    let (body, third) = match line.find("M(") {
        Some(pos) => {
            let inner = line[pos + 2..]
                .strip_suffix(')')
                .ok_or_else(|| err(lineno, "unterminated M( clause"))?;
            let mut eff = vec![1.0; species.len()];
            for tok in inner.split_whitespace() {
                let (sp, e) = tok
                    .split_once(':')
                    .ok_or_else(|| err(lineno, "third-body entries are `species:eff`"))?;
                let idx = species_index
                    .get(sp)
                    .copied()
                    .ok_or_else(|| KineticsError::UnknownSpecies(sp.to_string()))?;
                eff[idx] = e.parse().map_err(|_| err(lineno, "bad third-body efficiency"))?;
            }
            (line[..pos].trim(), Some(eff))
        }
        None => (line, None),
    };

    let (reversible, sep) = if body.contains("<=>") {
        (true, "<=>")
    } else if body.contains("=>") {
        (false, "=>")
    } else {
        return Err(err(lineno, "reaction needs `<=>` or `=>`"));
    };
    let (lhs, rest) = body.split_once(sep).unwrap();
    // The right side ends where the three rate numbers begin.
    let toks: Vec<&str> = rest.split_whitespace().collect();
    if toks.len() < 4 {
        return Err(err(lineno, "reaction needs products plus `A b Ea`"));
    }
    let nums = &toks[toks.len() - 3..];
    let rhs_txt = toks[..toks.len() - 3].join(" ");
    let a_input: f64 = nums[0].parse().map_err(|_| err(lineno, "bad A"))?;
    let b: f64 = nums[1].parse().map_err(|_| err(lineno, "bad b"))?;
    let ea_cal: f64 = nums[2].parse().map_err(|_| err(lineno, "bad Ea"))?;
    if a_input <= 0.0 {
        return Err(err(lineno, "pre-exponential A must be positive"));
    }

    let reactants = parse_side(lhs, lineno, species_index)?;
    let products = parse_side(&rhs_txt, lineno, species_index)?;
    let equation = format!(
        "{} {} {}",
        lhs.trim(),
        sep,
        rhs_txt.trim()
    );

    // Element balance.
    let mut balance = vec![0i64; elements.len()];
    for &(i, n) in &reactants {
        for &(e, c) in &species[i].composition {
            balance[e] += (n * c) as i64;
        }
    }
    for &(i, n) in &products {
        for &(e, c) in &species[i].composition {
            balance[e] -= (n * c) as i64;
        }
    }
    if balance.iter().any(|&d| d != 0) {
        let detail = balance
            .iter()
            .enumerate()
            .filter(|(_, &d)| d != 0)
            .map(|(e, &d)| format!("{}: {:+}", elements[e].symbol, -d))
            .collect::<Vec<_>>()
            .join(", ");
        return Err(KineticsError::ElementImbalance { reaction: equation, detail });
    }

    let nu_r: u32 = reactants.iter().map(|&(_, n)| n).sum();
    let nu_p: u32 = products.iter().map(|&(_, n)| n).sum();
    // Convert the pre-exponential from mol-cm3 to kmol-m3 concentrations:
    // a factor 1e3^(1-n) where n is the total forward order including the
    // third body.
    let order = nu_r + u32::from(third.is_some());
    let a_si = a_input * 1e3_f64.powi(1 - order as i32);

    Ok(ReactionSpec {
        reactants,
        products,
        a_input,
        a_si,
        b,
        ea_cal,
        t_act: ea_cal / super::R_CAL,
        reversible,
        third_body: third,
        delta_nu: nu_p as i32 - nu_r as i32,
        equation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
ELEMENTS
X 10.0
SPECIES
A X:1 200 1000 3500 2.5 0 0 0 0 0 0 2.5 0 0 0 0 0 0
B X:1 200 1000 3500 2.5 0 0 0 0 0 0 2.5 0 0 0 0 0 0
REACTIONS
A => B  1.0e3 0 0
";

    #[test]
    fn minimal_two_species_mechanism() {
        let m = parse_mechanism(MINIMAL).unwrap();
        assert_eq!(m.n_species(), 2);
        assert_eq!(m.reactions.len(), 1);
        assert!(!m.reactions[0].reversible);
        assert_eq!(m.species[0].molecular_weight, 10.0);
        // first order: A unchanged by unit conversion
        assert_eq!(m.reactions[0].a_si, m.reactions[0].a_input);
    }

    #[test]
    fn element_imbalance_reports_deficit() {
        let text = "\
ELEMENTS
H 1.008
O 15.999
SPECIES
H2 H:2 200 1000 3500 2.5 0 0 0 0 0 0 2.5 0 0 0 0 0 0
OH H:1 O:1 200 1000 3500 2.5 0 0 0 0 0 0 2.5 0 0 0 0 0 0
H2O H:2 O:1 200 1000 3500 2.5 0 0 0 0 0 0 2.5 0 0 0 0 0 0
REACTIONS
H2 + OH => H2O  1e13 0 0
";
        let e = parse_mechanism(text).unwrap_err();
        match e {
            KineticsError::ElementImbalance { detail, .. } => {
                assert!(detail.contains("H"), "detail was {detail}");
            }
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn unknown_species_in_reaction() {
        let text = MINIMAL.replace("A => B", "A => C");
        assert!(matches!(parse_mechanism(&text), Err(KineticsError::UnknownSpecies(_))));
    }

    #[test]
    fn nonpositive_a_rejected() {
        let text = MINIMAL.replace("1.0e3", "-1.0e3");
        assert!(parse_mechanism(&text).is_err());
    }

    #[test]
    fn thermo_discontinuity_rejected() {
        let text = MINIMAL.replace(
            "B X:1 200 1000 3500 2.5 0 0 0 0 0 0 2.5 0 0 0 0 0 0",
            "B X:1 200 1000 3500 2.5 0 0 0 0 0 0 3.5 0 0 0 0 0 0",
        );
        assert!(matches!(
            parse_mechanism(&text),
            Err(KineticsError::ThermoDiscontinuity { .. })
        ));
    }

    #[test]
    fn repeated_species_accumulate_coefficients() {
        let text = "\
ELEMENTS
X 10.0
SPECIES
A X:2 200 1000 3500 2.5 0 0 0 0 0 0 2.5 0 0 0 0 0 0
B X:1 200 1000 3500 2.5 0 0 0 0 0 0 2.5 0 0 0 0 0 0
REACTIONS
A <=> B + B  1e13 0 0
";
        let m = parse_mechanism(text).unwrap();
        assert_eq!(m.reactions[0].products, vec![(1, 2)]);
        assert_eq!(m.reactions[0].delta_nu, 1);
    }

    #[test]
    fn third_body_clause_and_unit_conversion() {
        let text = "\
ELEMENTS
X 10.0
SPECIES
A X:2 200 1000 3500 2.5 0 0 0 0 0 0 2.5 0 0 0 0 0 0
B X:1 200 1000 3500 2.5 0 0 0 0 0 0 2.5 0 0 0 0 0 0
REACTIONS
A <=> B + B  1e16 0 50000  M( A:2.5 )
";
        let m = parse_mechanism(text).unwrap();
        let r = &m.reactions[0];
        let tb = r.third_body.as_ref().unwrap();
        assert_eq!(tb, &vec![2.5, 1.0]);
        // order 2 (one reactant + third body): A scaled by 1e-3
        assert!((r.a_si - 1e16 * 1e-3).abs() < 1e6);
    }

    #[test]
    fn bundled_h2_mechanism_loads() {
        let m = parse_mechanism(crate::H2_O2_MECH).unwrap();
        assert_eq!(m.n_species(), 9);
        assert!(m.reactions.len() >= 15);
        // bath species declared last
        assert_eq!(m.species.last().unwrap().name, "N2");
        let sum: f64 = m.oxidizer_stream.iter().sum();
        assert!((sum - 1.0).abs() < 1e-10);
    }
}
