//! Dense 0-based indices into the tables of an [`EnvironmentSpec`](crate::sim::EnvironmentSpec).

use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! index_type {
    ($(#[$meta:meta])* $name:ident, $prefix:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub usize);

        impl $name {
            pub fn index(self) -> usize {
                self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }

        impl From<usize> for $name {
            fn from(v: usize) -> Self {
                Self(v)
            }
        }
    };
}

index_type!(
    /// A room of the household layout.
    RoomId,
    "r"
);
index_type!(
    /// A support surface (table, counter, bench, ...). Its containing room is
    /// stored in the surface table.
    SurfaceId,
    "s"
);
index_type!(
    /// A manipulable object instance.
    ObjectId,
    "o"
);
