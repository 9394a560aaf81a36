use alloc::vec::Vec;

use super::{Branch, Measured, SpectraError, Term};
use crate::spin::HalfInt;

pub const REFERENCE_MASS_NUMBER: u32 = 138;

/// Isotope shifts and hyperfine constants of Ba+, MHz.
///
/// Columns: A, I, dnu_b, dnu_r, A(S1/2), A(P1/2), A(D3/2), B(D3/2). Empty
/// strings mark absent constants.
pub const TABLE: [[&str; 8]; 8] = [
    ["130", "0", "355.3(4.4)", "394(1)", "", "", "", ""],
    ["132", "0", "278.9(4)", "292(1)", "", "", "", ""],
    ["133", "1/2", "373(4)", "198(4)", "-9925.45355459(10)", "-1840(11)", "-468.5(1.5)", ""],
    ["134", "0", "222.6(3)", "174.5(8)", "", "", "", ""],
    ["135", "3/2", "348.6(2.1)", "82.7(6)", "3591.67011718(24)", "664.6(3)", "169.5892(9)", "28.9536(25)"],
    ["136", "0", "179.4(1.8)", "68.0(5)", "", "", "", ""],
    ["137", "3/2", "271.1(1.7)", "-13.0(4)", "4018.87083385(18)", "743.7(3)", "189.7288(6)", "44.5417(16)"],
    ["138", "0", "0", "0", "", "", "", ""],
];

/// Entries measured on the single-ion setup, `(A, column)`; they carry the
/// wavemeter systematic on top of the tabulated statistical uncertainty.
pub const WAVEMETER_LIMITED: [(u32, usize); 4] = [(130, 3), (132, 3), (133, 3), (133, 6)];

/// One row of the isotope table.
#[derive(Clone, Debug, PartialEq)]
pub struct IsotopeRecord {
    pub mass_number: u32,
    pub spin: HalfInt,
    pub shift_b: Measured,
    pub shift_r: Measured,
    pub a_s12: Option<Measured>,
    pub a_p12: Option<Measured>,
    pub a_d32: Option<Measured>,
    pub b_d32: Option<Measured>,
}

fn optional(s: &str) -> Result<Option<Measured>, SpectraError> {
    if s.trim().is_empty() {
        Ok(None)
    } else {
        s.parse().map(Some)
    }
}

impl IsotopeRecord {
    /// Build a record from the eight table columns and check its invariants.
    pub fn from_fields(fields: &[&str; 8]) -> Result<Self, SpectraError> {
        let mass_number = fields[0]
            .trim()
            .parse()
            .map_err(|_| SpectraError::BadNumber(fields[0].into()))?;
        let spin = fields[1]
            .parse()
            .map_err(|_| SpectraError::BadSpin(fields[1].into()))?;
        let record = IsotopeRecord {
            mass_number,
            spin,
            shift_b: fields[2].parse()?,
            shift_r: fields[3].parse()?,
            a_s12: optional(fields[4])?,
            a_p12: optional(fields[5])?,
            a_d32: optional(fields[6])?,
            b_d32: optional(fields[7])?,
        };
        record.validate()?;
        Ok(record)
    }

    pub fn validate(&self) -> Result<(), SpectraError> {
        let fail = |why| Err(SpectraError::InvalidRecord(self.mass_number, why));
        if self.mass_number == REFERENCE_MASS_NUMBER
            && (self.shift_b.value != 0.0 || self.shift_r.value != 0.0)
        {
            return fail("reference isotope must have zero shifts");
        }
        let magnetic = [&self.a_s12, &self.a_p12, &self.a_d32];
        if self.spin == HalfInt::ZERO {
            if magnetic.iter().any(|c| c.is_some()) || self.b_d32.is_some() {
                return fail("I = 0 carries no hyperfine constants");
            }
        } else if magnetic.iter().any(|c| c.is_none()) {
            return fail("I > 0 needs all three magnetic constants");
        }
        if self.spin.twice() < 2 && self.b_d32.is_some() {
            return fail("quadrupole constant requires I >= 1");
        }
        Ok(())
    }

    /// Eight table columns, as written.
    pub fn to_fields(&self) -> [alloc::string::String; 8] {
        use alloc::string::ToString;
        let opt = |m: &Option<Measured>| m.as_ref().map(|m| m.to_string()).unwrap_or_default();
        [
            self.mass_number.to_string(),
            self.spin.to_string(),
            self.shift_b.to_string(),
            self.shift_r.to_string(),
            opt(&self.a_s12),
            opt(&self.a_p12),
            opt(&self.a_d32),
            opt(&self.b_d32),
        ]
    }

    pub fn shift(&self, branch: Branch) -> &Measured {
        match branch {
            Branch::Blue => &self.shift_b,
            Branch::Red => &self.shift_r,
        }
    }

    /// Magnetic dipole constant of `term`, 0 when absent.
    pub fn a_constant(&self, term: Term) -> f64 {
        let c = match term {
            Term::S12 => &self.a_s12,
            Term::P12 => &self.a_p12,
            Term::D32 => &self.a_d32,
        };
        c.as_ref().map_or(0.0, |m| m.value)
    }

    /// Electric quadrupole constant of `term`, 0 when absent.
    pub fn b_constant(&self, term: Term) -> f64 {
        match term {
            Term::D32 => self.b_d32.as_ref().map_or(0.0, |m| m.value),
            _ => 0.0,
        }
    }

    pub fn label(&self) -> alloc::string::String {
        alloc::format!("{}Ba+", self.mass_number)
    }
}

/// The embedded table, parsed.
pub fn registry() -> Vec<IsotopeRecord> {
    TABLE.iter().map(embedded).collect()
}

pub fn isotope(mass_number: u32) -> Result<IsotopeRecord, SpectraError> {
    TABLE
        .iter()
        .find(|row| row[0] == alloc::format!("{mass_number}"))
        .map(embedded)
        .ok_or(SpectraError::UnknownIsotope(mass_number))
}

fn embedded(row: &[&str; 8]) -> IsotopeRecord {
    let mut rec = IsotopeRecord::from_fields(row).expect("embedded table is well-formed");
    for &(a, col) in &WAVEMETER_LIMITED {
        if a != rec.mass_number {
            continue;
        }
        let sys = crate::constants::WAVEMETER_SYSTEMATIC_MHZ;
        match col {
            3 => rec.shift_r.sys = sys,
            6 => {
                if let Some(m) = rec.a_d32.as_mut() {
                    m.sys = sys;
                }
            }
            _ => unreachable!("only the red shift and A(D3/2) were measured here"),
        }
    }
    rec
}
