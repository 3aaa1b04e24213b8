use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident, $prefix:literal) => {
        $(#[$meta])*
        #[derive(
            Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl From<usize> for $name {
            fn from(v: usize) -> Self {
                $name(u32::try_from(v).expect("identifier overflow"))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(
    /// Physical task identifier, dense from zero in instantiation order.
    TaskId,
    "t"
);
id_type!(
    /// Abstract task (workflow step) identifier.
    AbstractId,
    "a"
);
id_type!(
    /// Data file identifier. Workflow inputs come first, then task outputs.
    FileId,
    "f"
);
id_type!(
    /// Cluster node identifier, dense from zero.
    NodeId,
    "n"
);
id_type!(
    /// Copy operation identifier, assigned on activation.
    CopId,
    "c"
);
