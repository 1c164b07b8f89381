//! Source generators for the machine-model fixtures. The committed `.dyn`
//! files are the output of these functions with [`FIXTURE_SEED`]; a test
//! keeps them in sync.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FIXTURE_SEED: u64 = 42;

const MACHINE_CONSTANTS: [&str; 17] = [
    "c1", "c2", "c3", "c4", "c5", "c6", "c7", "c8", "c9", "c10", "c11", "c12", "c13", "c14", "c15",
    "A_sat", "B_sat",
];

/// Positive values in [0.5, 1.5), four decimals, one `name = value` per line.
fn param_block(rng: &mut ChaCha8Rng, names: &[String]) -> String {
    let lines: Vec<String> = names
        .iter()
        .map(|n| format!("  {n} = {:.4}", rng.gen_range(0.5..1.5)))
        .collect();
    format!("params\n{}\n", lines.join(",\n"))
}

/// Machine and exciter dynamics for machine `i`. `p` maps a constant's base
/// name to its model name; `id`/`iq` are machine-frame stator currents.
fn machine_equations(
    out: &mut String,
    i: &str,
    p: &dyn Fn(&str) -> String,
    id: &str,
    iq: &str,
    reference: &str,
) {
    let _ = writeln!(
        out,
        "deriv Eq{i} = {}*(-Eq{i} - {}*{id} + Efd{i})",
        p("c1"),
        p("c2")
    );
    let _ = writeln!(out, "deriv Ed{i} = {}*(-Ed{i} + {}*{iq})", p("c3"), p("c4"));
    let _ = writeln!(out, "deriv delta{i} = omega{i} - {}", p("c5"));
    let _ = writeln!(
        out,
        "deriv omega{i} = {}*(TM{i} - Ed{i}*{id} - Eq{i}*{iq} - {}*{id}*{iq} - {}*(omega{i} - {}))",
        p("c6"),
        p("c7"),
        p("c8"),
        p("c5")
    );
    let _ = writeln!(
        out,
        "deriv Efd{i} = {}*(-({} + {}*exp({}*Efd{i}))*Efd{i} + VR{i})",
        p("c9"),
        p("c10"),
        p("A_sat"),
        p("B_sat")
    );
    let _ = writeln!(
        out,
        "deriv Rf{i} = {}*(-Rf{i} + {}*Efd{i})",
        p("c11"),
        p("c12")
    );
    let _ = writeln!(
        out,
        "deriv VR{i} = {}*(-VR{i} + {}*Rf{i} - {}*Efd{i} + {}*{reference})",
        p("c13"),
        p("c14"),
        p("c15"),
        p("c14")
    );
}

/// Single machine with an IEEE type-1 exciter; stator currents are eliminated
/// through the inverse of the dq impedance matrix.
pub fn decentralized_source(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut names: Vec<String> = MACHINE_CONSTANTS.iter().map(|s| s.to_string()).collect();
    names.extend(["Rs", "Xdp", "Xqp"].map(String::from));

    // V sin(delta - theta) = sin(delta) VD - cos(delta) VQ
    // V cos(delta - theta) = cos(delta) VD + sin(delta) VQ
    let a = "(Ed1 - sin(delta1)*VD1 + cos(delta1)*VQ1)";
    let b = "(Eq1 - cos(delta1)*VD1 - sin(delta1)*VQ1)";
    let det = "(Rs^2 + Xqp*Xdp)";
    let id = format!("((Rs*{a} + Xqp*{b})/{det})");
    let iq = format!("((Rs*{b} - Xdp*{a})/{det})");

    let mut out = String::from(
        "# Fourth-order synchronous machine with an IEEE type-1 exciter, decentralized form.\n\
         # Terminal voltages VD1, VQ1 are inputs; network-frame stator currents ID1, IQ1\n\
         # are outputs. Vt1 is the terminal voltage magnitude seen by the regulator.\n\
         # Parameter values are placeholders drawn from a seeded generator.\n\
         system wscc_decentralized\n\
         states Eq1 Ed1 delta1 omega1 Efd1 Rf1 VR1\n\
         inputs TM1 Vref1 VD1 VQ1 Vt1\n",
    );
    out.push_str(&param_block(&mut rng, &names));
    machine_equations(&mut out, "1", &|c| c.to_string(), &id, &iq, "(Vref1 - Vt1)");
    let _ = writeln!(out, "output ID1 = {id}*sin(delta1) + {iq}*cos(delta1)");
    let _ = writeln!(out, "output IQ1 = {iq}*sin(delta1) - {id}*cos(delta1)");
    out
}

/// Three machines coupled through a randomly drawn reduced network. Machine i
/// sees every internal voltage j through conductance `g_i_j` and susceptance
/// `b_i_j`, rotated by `delta_i - delta_j`.
pub fn centralized_synthetic_source(seed: u64) -> String {
    const M: [&str; 3] = ["1", "2", "3"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut names: Vec<String> = Vec::new();
    for i in M {
        names.extend(MACHINE_CONSTANTS.iter().map(|c| format!("{c}_{i}")));
    }
    for i in M {
        for j in M {
            names.push(format!("g_{i}_{j}"));
            names.push(format!("b_{i}_{j}"));
        }
    }

    let currents = |i: &str| {
        let (mut id, mut iq) = (Vec::new(), Vec::new());
        for j in M {
            let (g, b) = (format!("g_{i}_{j}"), format!("b_{i}_{j}"));
            if i == j {
                id.push(format!("{g}*Ed{j} - {b}*Eq{j}"));
                iq.push(format!("{g}*Eq{j} + {b}*Ed{j}"));
            } else {
                let s = format!("sin(delta{i} - delta{j})");
                let c = format!("cos(delta{i} - delta{j})");
                id.push(format!(
                    "{g}*(Ed{j}*{c} + Eq{j}*{s}) + {b}*(Ed{j}*{s} - Eq{j}*{c})"
                ));
                iq.push(format!(
                    "{g}*(Eq{j}*{c} - Ed{j}*{s}) + {b}*(Ed{j}*{c} + Eq{j}*{s})"
                ));
            }
        }
        (
            format!("({})", id.join(" + ")),
            format!("({})", iq.join(" + ")),
        )
    };
    let grouped = |prefixes: &[&str]| -> String {
        prefixes
            .iter()
            .flat_map(|s| M.iter().map(move |i| format!("{s}{i}")))
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut out = String::from(
        "# Three machines with IEEE type-1 exciters and a synthetic, fully coupled\n\
         # reduced network. All constants are placeholders drawn from a seeded generator.\n\
         system wscc_centralized_synthetic\n",
    );
    let _ = writeln!(
        out,
        "states {}",
        grouped(&["Ed", "Eq", "delta", "omega", "Efd", "Rf", "VR"])
    );
    let _ = writeln!(out, "inputs {}", grouped(&["TM", "Vref"]));
    out.push_str(&param_block(&mut rng, &names));
    for i in M {
        let (id, iq) = currents(i);
        let p = |c: &str| format!("{c}_{i}");
        machine_equations(&mut out, i, &p, &id, &iq, &format!("Vref{i}"));
    }
    for i in M {
        let _ = writeln!(
            out,
            "output VD{i} = Ed{i}*sin(delta{i}) + Eq{i}*cos(delta{i})"
        );
        let _ = writeln!(
            out,
            "output VQ{i} = Eq{i}*sin(delta{i}) - Ed{i}*cos(delta{i})"
        );
    }
    out
}
