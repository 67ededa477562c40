//! The seven scored metadata fields and fixed-order maps keyed by them.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// The metadata fields that enter the quality scores.
///
/// The variant order is the canonical row order used everywhere a field map
/// is iterated or serialized, so emitted JSON is deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScoredField {
    Title,
    Description,
    Subjects,
    Level,
    Language,
    TimeRequired,
    Accessibilities,
}

impl ScoredField {
    pub const ALL: [ScoredField; 7] = [
        ScoredField::Title,
        ScoredField::Description,
        ScoredField::Subjects,
        ScoredField::Level,
        ScoredField::Language,
        ScoredField::TimeRequired,
        ScoredField::Accessibilities,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScoredField::Title => "title",
            ScoredField::Description => "description",
            ScoredField::Subjects => "subjects",
            ScoredField::Level => "level",
            ScoredField::Language => "language",
            ScoredField::TimeRequired => "time_required",
            ScoredField::Accessibilities => "accessibilities",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    fn index(self) -> usize {
        self as usize
    }

    /// The length-rated subset, if this field is rated by length rather than
    /// by presence.
    pub fn length_field(self) -> Option<LengthField> {
        match self {
            ScoredField::Title => Some(LengthField::Title),
            ScoredField::Description => Some(LengthField::Description),
            ScoredField::Subjects => Some(LengthField::Subjects),
            _ => None,
        }
    }
}

impl fmt::Display for ScoredField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The three fields whose metadata values are rated by length; the other
/// four are rated by presence only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LengthField {
    Title,
    Description,
    Subjects,
}

impl LengthField {
    pub const ALL: [LengthField; 3] = [
        LengthField::Title,
        LengthField::Description,
        LengthField::Subjects,
    ];

    pub fn name(self) -> &'static str {
        ScoredField::from(self).name()
    }
}

impl From<LengthField> for ScoredField {
    fn from(field: LengthField) -> Self {
        match field {
            LengthField::Title => ScoredField::Title,
            LengthField::Description => ScoredField::Description,
            LengthField::Subjects => ScoredField::Subjects,
        }
    }
}

impl TryFrom<ScoredField> for LengthField {
    type Error = Error;

    fn try_from(field: ScoredField) -> Result<Self, Error> {
        field.length_field().ok_or(Error::NotLengthRated(field))
    }
}

/// A total map from [`ScoredField`] to `T`, stored densely.
///
/// Serializes as a JSON object with one key per field, always in the
/// canonical field order; deserialization requires exactly the seven keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldMap<T>([T; 7]);

impl<T> FieldMap<T> {
    pub fn from_fn(mut f: impl FnMut(ScoredField) -> T) -> Self {
        Self(std::array::from_fn(|i| f(ScoredField::ALL[i])))
    }

    pub fn iter(&self) -> impl Iterator<Item = (ScoredField, &T)> {
        ScoredField::ALL.iter().copied().zip(self.0.iter())
    }

    pub fn values(&self) -> impl Iterator<Item = &T> {
        self.0.iter()
    }

    pub fn map<U>(&self, mut f: impl FnMut(ScoredField, &T) -> U) -> FieldMap<U> {
        FieldMap::from_fn(|field| f(field, &self[field]))
    }
}

impl<T: Copy + Default> Default for FieldMap<T> {
    fn default() -> Self {
        Self([T::default(); 7])
    }
}

impl<T> Index<ScoredField> for FieldMap<T> {
    type Output = T;

    fn index(&self, field: ScoredField) -> &T {
        &self.0[field.index()]
    }
}

impl<T> IndexMut<ScoredField> for FieldMap<T> {
    fn index_mut(&mut self, field: ScoredField) -> &mut T {
        &mut self.0[field.index()]
    }
}

impl<T: Serialize> Serialize for FieldMap<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(7))?;
        for (field, value) in self.iter() {
            map.serialize_entry(field.name(), value)?;
        }
        map.end()
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for FieldMap<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct FieldMapVisitor<T>(std::marker::PhantomData<T>);

        impl<'de, T: Deserialize<'de>> Visitor<'de> for FieldMapVisitor<T> {
            type Value = FieldMap<T>;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map with one entry per scored metadata field")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut slots: [Option<T>; 7] = Default::default();
                while let Some(key) = access.next_key::<String>()? {
                    let field = ScoredField::from_name(&key).ok_or_else(|| {
                        serde::de::Error::custom(format!("unknown scored field `{key}`"))
                    })?;
                    if slots[field.index()].is_some() {
                        return Err(serde::de::Error::custom(format!(
                            "duplicate scored field `{key}`"
                        )));
                    }
                    slots[field.index()] = Some(access.next_value()?);
                }
                for (slot, field) in slots.iter().zip(ScoredField::ALL) {
                    if slot.is_none() {
                        return Err(serde::de::Error::custom(format!(
                            "missing scored field `{}`",
                            field.name()
                        )));
                    }
                }
                Ok(FieldMap(slots.map(|s| s.expect("checked above"))))
            }
        }

        deserializer.deserialize_map(FieldMapVisitor(std::marker::PhantomData))
    }
}
