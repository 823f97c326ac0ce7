//! Identifier newtypes and small shared value types.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name(s)
            }
        }
    };
}

string_id!(
    /// Opaque journal identifier.
    JournalId
);
string_id!(
    /// Opaque paper identifier, unique within a corpus.
    PaperId
);
string_id!(
    /// Opaque author identifier, taken verbatim from the input.
    AuthorId
);

/// Inclusive calendar-year range, written `Y1:Y2` on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct YearRange {
    pub start: i32,
    pub end: i32,
}

impl YearRange {
    pub fn new(start: i32, end: i32) -> Result<Self> {
        if start > end {
            return Err(Error::config(format!("year range {start}:{end} is empty")));
        }
        Ok(YearRange { start, end })
    }

    pub fn contains(&self, year: i32) -> bool {
        self.start <= year && year <= self.end
    }

    pub fn years(&self) -> impl DoubleEndedIterator<Item = i32> + Clone {
        self.start..=self.end
    }

    pub fn len(&self) -> usize {
        (self.end - self.start + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl Default for YearRange {
    fn default() -> Self {
        YearRange {
            start: 1990,
            end: 2012,
        }
    }
}

impl fmt::Display for YearRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start, self.end)
    }
}

impl FromStr for YearRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::config(format!("expected Y1:Y2, got `{s}`")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<i32>()
                .map_err(|_| Error::config(format!("bad year `{v}` in `{s}`")))
        };
        YearRange::new(parse(a)?, parse(b)?)
    }
}

/// Impact-factor window length in years. Only the two- and five-year
/// windows are meaningful.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum WindowLen {
    #[default]
    Two,
    Five,
}

impl WindowLen {
    pub fn years(self) -> i32 {
        match self {
            WindowLen::Two => 2,
            WindowLen::Five => 5,
        }
    }

    /// Publication years `[y - k, y - 1]` covered by the window for year `y`.
    pub fn span(self, year: i32) -> (i32, i32) {
        (year - self.years(), year - 1)
    }
}

impl TryFrom<u32> for WindowLen {
    type Error = Error;

    fn try_from(v: u32) -> Result<Self> {
        match v {
            2 => Ok(WindowLen::Two),
            5 => Ok(WindowLen::Five),
            other => Err(Error::config(format!(
                "window length must be 2 or 5, got {other}"
            ))),
        }
    }
}

impl From<WindowLen> for u32 {
    fn from(w: WindowLen) -> u32 {
        w.years() as u32
    }
}

impl FromStr for WindowLen {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v: u32 = s
            .trim()
            .parse()
            .map_err(|_| Error::config(format!("window length must be 2 or 5, got `{s}`")))?;
        WindowLen::try_from(v)
    }
}

/// Publishing house tag carried by the optional `publisher` field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Publisher {
    #[serde(rename = "ACM")]
    Acm,
    Elsevier,
    #[serde(rename = "IEEE")]
    Ieee,
    Springer,
    Wiley,
    OxfordPress,
    Other,
    Unknown,
}

impl Publisher {
    pub const ALL: [Publisher; 8] = [
        Publisher::Acm,
        Publisher::Elsevier,
        Publisher::Ieee,
        Publisher::Springer,
        Publisher::Wiley,
        Publisher::OxfordPress,
        Publisher::Other,
        Publisher::Unknown,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Publisher::Acm => "ACM",
            Publisher::Elsevier => "Elsevier",
            Publisher::Ieee => "IEEE",
            Publisher::Springer => "Springer",
            Publisher::Wiley => "Wiley",
            Publisher::OxfordPress => "OxfordPress",
            Publisher::Other => "Other",
            Publisher::Unknown => "Unknown",
        }
    }
}

impl fmt::Display for Publisher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Publisher {
    type Err = String;

    /// Case-insensitive; spaces are ignored so "Oxford Press" is accepted.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let key: String = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .flat_map(char::to_lowercase)
            .collect();
        Publisher::ALL
            .into_iter()
            .find(|p| p.name().to_lowercase() == key)
            .ok_or_else(|| format!("unknown publisher `{s}`"))
    }
}
