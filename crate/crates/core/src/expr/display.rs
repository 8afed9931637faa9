use super::{Binding, DOp, Factor, FieldOp, Index, KernelKind, Monomial, Ops, Point, SymExpr, Tensor};
use crate::coeff::{CoeffElem, SymbolTable};
use std::fmt::{self, Write};

const DUMMY_GREEK: &[&str] =
    &["\\alpha", "\\beta", "\\gamma", "\\kappa", "\\tau", "\\omega", "\\chi", "\\psi", "\\theta"];

pub fn point_latex(p: &Point) -> String {
    match p.0.strip_prefix('#') {
        Some(k) => format!("x_{{{k}}}"),
        None => p.0.clone(),
    }
}

fn index_name_latex(name: &str) -> String {
    if let Some(rest) = name.strip_prefix('#') {
        let mut chars = rest.chars();
        if let (Some(c), None) = (chars.next(), chars.clone().next()) {
            let k = (c as u8).wrapping_sub(b'a') as usize;
            if k < DUMMY_GREEK.len() {
                return DUMMY_GREEK[k].to_string();
            }
        }
        return format!("\\alpha_{{{rest}}}");
    }
    match name {
        "mu" | "nu" | "rho" | "sigma" | "alpha" | "beta" | "gamma" | "kappa" => format!("\\{name}"),
        _ => name.to_string(),
    }
}

pub fn index_latex(i: &Index) -> String {
    let n = index_name_latex(&i.name);
    if i.up {
        format!("^{{{n}}}")
    } else {
        format!("_{{{n}}}")
    }
}

fn index_text(i: &Index) -> String {
    format!("{}{}", if i.up { "^" } else { "_" }, i.name)
}

fn ops_text(ops: &Ops) -> String {
    let mut s = String::new();
    for o in ops.iter().rev() {
        match o {
            DOp::Cov(i) => write!(s, "d{} ", index_text(i)).unwrap(),
            DOp::Box => s.push_str("Box "),
            DOp::P0 => s.push_str("P0 "),
        }
    }
    s
}

fn ops_latex(ops: &Ops, slot: Option<&Point>) -> String {
    let mut s = String::new();
    let sup = slot.map(|p| format!("^{{({})}}", point_latex(p))).unwrap_or_default();
    for o in ops.iter().rev() {
        match o {
            DOp::Cov(i) => {
                if slot.is_some() {
                    write!(s, "\\nabla{sup}{{}}{} ", index_latex(i)).unwrap();
                } else {
                    write!(s, "\\nabla{} ", index_latex(i)).unwrap();
                }
            }
            DOp::Box => write!(s, "\\Box{} ", sup).unwrap(),
            DOp::P0 => write!(s, "P_0{} ", sup).unwrap(),
        }
    }
    s
}

fn kernel_latex(k: KernelKind) -> String {
    match k {
        KernelKind::H => "H".into(),
        KernelKind::HF => "H_{F}".into(),
        KernelKind::HAF => "H_{AF}".into(),
        KernelKind::Delta => "\\Delta".into(),
        KernelKind::DeltaA => "\\Delta_{A}".into(),
        KernelKind::DeltaR => "\\Delta_{R}".into(),
        KernelKind::DiracDelta => "\\delta".into(),
        KernelKind::W => "W".into(),
        KernelKind::Hs => "H_{s}".into(),
        KernelKind::Slot(k) => format!("K_{{{k}}}"),
        KernelKind::Zero => "0".into(),
    }
}

fn tensor_text(t: Tensor) -> &'static str {
    match t {
        Tensor::Metric => "g",
        Tensor::InverseMetric => "ginv",
        Tensor::Einstein => "G",
        Tensor::Ricci => "Ric",
        Tensor::RicciScalar => "R",
        Tensor::Weyl => "C",
        Tensor::V1 => "v1",
    }
}

fn tensor_latex(t: Tensor) -> &'static str {
    match t {
        Tensor::Metric | Tensor::InverseMetric => "g",
        Tensor::Einstein => "G",
        Tensor::Ricci => "R",
        Tensor::RicciScalar => "R",
        Tensor::Weyl => "C",
        Tensor::V1 => "v_{1}",
    }
}

fn pow_text(base: String, exp: u32, wrap: bool) -> String {
    if exp == 1 {
        base
    } else if wrap {
        format!("({base})^{exp}")
    } else {
        format!("{base}^{exp}")
    }
}

pub fn factor_text(f: &Factor) -> String {
    match f {
        Factor::Field { at, ops, exp } => {
            if ops.is_empty() {
                format!("{}({at})", pow_text("phi".into(), *exp, false))
            } else {
                pow_text(format!("{}phi({at})", ops_text(ops)), *exp, true)
            }
        }
        Factor::Kernel { kind, at, ops, exp } => {
            let base = format!("{}({}{}, {}{})", kind.name(), ops_text(&ops[0]), at[0], ops_text(&ops[1]), at[1]);
            pow_text(base, *exp, false)
        }
        Factor::Geom { tensor, at, idx, ops, exp } => {
            let ind: String = idx.iter().map(index_text).collect::<Vec<_>>().join(" ");
            let base = if idx.is_empty() {
                format!("{}{}({at})", ops_text(ops), tensor_text(*tensor))
            } else {
                format!("{}{}[{ind}]({at})", ops_text(ops), tensor_text(*tensor))
            };
            pow_text(base, *exp, true)
        }
        Factor::TestFn { label, at, ops, exp } => pow_text(format!("{}{label}({at})", ops_text(ops)), *exp, true),
        Factor::Applied { op, at, power } => {
            let target = pow_text("phi".into(), *power, false);
            match op {
                FieldOp::Box => format!("Box[{target}]({at})"),
                FieldOp::P0 => format!("P0[{target}]({at})"),
                FieldOp::NablaPair(a, b) => {
                    format!("d{} d{}[{target}]({at})", index_text(b), index_text(a))
                }
            }
        }
    }
}

pub fn factor_latex(f: &Factor) -> String {
    let pw = |base: String, exp: u32, wrap: bool| -> String {
        if exp == 1 {
            base
        } else if wrap {
            format!("\\left({base}\\right)^{{{exp}}}")
        } else {
            format!("{base}^{{{exp}}}")
        }
    };
    match f {
        Factor::Field { at, ops, exp } => {
            if ops.is_empty() {
                format!("{}({})", pw("\\phi".into(), *exp, false), point_latex(at))
            } else {
                pw(format!("{}\\phi({})", ops_latex(ops, None), point_latex(at)), *exp, true)
            }
        }
        Factor::Kernel { kind, at, ops, exp } => {
            let d = format!("{}{}", ops_latex(&ops[0], Some(&at[0])), ops_latex(&ops[1], Some(&at[1])));
            let k = if d.is_empty() {
                pw(kernel_latex(*kind), *exp, false)
            } else {
                pw(format!("{d} {}", kernel_latex(*kind)), *exp, true)
            };
            if d.is_empty() {
                format!("{k}({}, {})", point_latex(&at[0]), point_latex(&at[1]))
            } else {
                format!("{k}\\big|_{{({}, {})}}", point_latex(&at[0]), point_latex(&at[1]))
            }
        }
        Factor::Geom { tensor, at, idx, ops, exp } => {
            let ind: String = idx.iter().map(index_latex).collect();
            let base = format!("{}{}{{}}{}({})", ops_latex(ops, None), tensor_latex(*tensor), ind, point_latex(at));
            pw(base, *exp, true)
        }
        Factor::TestFn { label, at, ops, exp } => {
            pw(format!("{}{label}({})", ops_latex(ops, None), point_latex(at)), *exp, true)
        }
        Factor::Applied { op, at, power } => {
            let target = pw("\\phi".into(), *power, false);
            let o = match op {
                FieldOp::Box => "\\Box".to_string(),
                FieldOp::P0 => "P_0".to_string(),
                FieldOp::NablaPair(a, b) => format!("\\nabla{}\\nabla{}", index_latex(b), index_latex(a)),
            };
            format!("{o}\\left({target}\\right)({})", point_latex(at))
        }
    }
}

fn orders_text(m: &Monomial) -> String {
    let mut s = String::new();
    if m.lambda > 0 {
        s.push_str(&pow_text("lambda".into(), m.lambda, false));
        s.push(' ');
    }
    if m.hbar != 0 {
        if m.hbar == 1 {
            s.push_str("hbar ");
        } else {
            write!(s, "hbar^{} ", m.hbar).unwrap();
        }
    }
    s
}

pub fn write_monomial(m: &Monomial, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "({})", m.coeff)?;
    let o = orders_text(m);
    if !o.is_empty() {
        write!(f, " {}", o.trim_end())?;
    }
    let ints: Vec<String> = m
        .points
        .iter()
        .filter_map(|(p, b)| match b {
            Binding::Integrated(_) => Some(p.to_string()),
            Binding::Free => None,
        })
        .collect();
    if !ints.is_empty() {
        write!(f, " int[{}]", ints.join(","))?;
    }
    for fac in &m.factors {
        write!(f, " {}", factor_text(fac))?;
    }
    Ok(())
}

pub fn write_expr(e: &SymExpr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if e.is_zero() {
        return write!(f, "0");
    }
    for (k, m) in e.monomials().iter().enumerate() {
        if k > 0 {
            write!(f, "\n+ ")?;
        }
        write_monomial(m, f)?;
    }
    Ok(())
}

fn coeff_prefix(c: &CoeffElem, t: &SymbolTable) -> String {
    if c.is_one() {
        return String::new();
    }
    if (-c).is_one() {
        return "-".into();
    }
    let s = c.to_latex(t);
    if c.len() > 1 {
        format!("\\left({s}\\right)")
    } else {
        s
    }
}

pub fn monomial_latex(m: &Monomial, t: &SymbolTable) -> String {
    let mut s = coeff_prefix(&m.coeff, t);
    if m.lambda > 0 {
        if m.lambda == 1 {
            s.push_str("\\lambda ");
        } else {
            write!(s, "\\lambda^{{{}}} ", m.lambda).unwrap();
        }
    }
    if m.hbar != 0 {
        if m.hbar == 1 {
            s.push_str("\\hbar ");
        } else {
            write!(s, "\\hbar^{{{}}} ", m.hbar).unwrap();
        }
    }
    let ints: Vec<String> = m
        .points
        .iter()
        .filter(|(_, b)| matches!(b, Binding::Integrated(_)))
        .map(|(p, _)| format!("d{}", point_latex(p)))
        .collect();
    if !ints.is_empty() {
        write!(s, "\\int {}\\, ", ints.join("\\,")).unwrap();
    }
    let body: Vec<String> = m.factors.iter().map(factor_latex).collect();
    s.push_str(&body.join(" "));
    if s.is_empty() || s == "-" {
        s.push('1');
    }
    s
}

pub fn expr_latex(e: &SymExpr, t: &SymbolTable) -> String {
    if e.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, m) in e.monomials().iter().enumerate() {
        let s = monomial_latex(m, t);
        if k == 0 {
            out.push_str(&s);
        } else if let Some(rest) = s.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&s);
        }
    }
    out
}
