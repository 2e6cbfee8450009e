//! Sweep lists: comma-separated items, each a value or an inclusive range `a:b`.

use std::fmt::Display;
use std::str::FromStr;

/// Parses `"1:3,7"` into `[1, 2, 3, 7]`.
pub fn parse_int_list<T>(text: &str) -> Result<Vec<T>, String>
where
    T: FromStr + TryFrom<u64> + Into<u64> + Copy,
    <T as FromStr>::Err: Display,
{
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim) {
        if item.is_empty() {
            return Err(format!("empty item in list '{text}'"));
        }
        match item.split_once(':') {
            Some((a, b)) => {
                let lo: u64 = parse_one::<T>(a)?.into();
                let hi: u64 = parse_one::<T>(b)?.into();
                if lo > hi {
                    return Err(format!("range '{item}' is empty"));
                }
                for v in lo..=hi {
                    out.push(T::try_from(v).map_err(|_| format!("{v} is out of range"))?);
                }
            }
            None => out.push(parse_one::<T>(item)?),
        }
    }
    Ok(out)
}

fn parse_one<T>(text: &str) -> Result<T, String>
where
    T: FromStr,
    <T as FromStr>::Err: Display,
{
    text.trim().parse::<T>().map_err(|e| format!("'{text}': {e}"))
}

/// Parses exactly two comma-separated integers.
pub fn parse_pair(text: &str) -> Result<(u32, u32), String> {
    match parse_int_list::<u32>(text)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(format!("expected two values like '5,5', got '{text}'")),
    }
}

/// A parsed sweep list, kept as one flag value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct List<T>(pub Vec<T>);

pub fn usize_list(text: &str) -> Result<List<usize>, String> {
    Ok(List(parse_int_list::<u64>(text)?.into_iter().map(|v| v as usize).collect()))
}

pub fn u32_list(text: &str) -> Result<List<u32>, String> {
    parse_int_list::<u32>(text).map(List)
}
