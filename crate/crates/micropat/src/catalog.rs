//! The micro-pattern catalog: identifiers, display names, categories, and
//! the entity kinds each pattern is defined over.

use crate::model::EntityKind;

/// The 18 micro-patterns, in canonical report/column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatternId {
    Ownable,
    Stoppable,
    PullPayment,
    ReentrancyGuard,
    Payable,
    Borrower,
    Implementer,
    ModifierUsage,
    StorageSaver,
    Reader,
    Operator,
    Provider,
    Supporter,
    Delegator,
    NamedReturn,
    Returnless,
    Emitter,
    Muted,
}

pub const PATTERN_COUNT: usize = 18;

pub const ALL_PATTERNS: [PatternId; PATTERN_COUNT] = [
    PatternId::Ownable,
    PatternId::Stoppable,
    PatternId::PullPayment,
    PatternId::ReentrancyGuard,
    PatternId::Payable,
    PatternId::Borrower,
    PatternId::Implementer,
    PatternId::ModifierUsage,
    PatternId::StorageSaver,
    PatternId::Reader,
    PatternId::Operator,
    PatternId::Provider,
    PatternId::Supporter,
    PatternId::Delegator,
    PatternId::NamedReturn,
    PatternId::Returnless,
    PatternId::Emitter,
    PatternId::Muted,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    Security,
    Functional,
    Optimization,
    Interaction,
    Feedback,
}

impl Category {
    pub fn label(self) -> &'static str {
        match self {
            Category::Security => "Security",
            Category::Functional => "Functional",
            Category::Optimization => "Optimization",
            Category::Interaction => "Interaction",
            Category::Feedback => "Feedback",
        }
    }
}

impl PatternId {
    /// Stable column position (0..18) in matrices and reports.
    pub fn index(self) -> usize {
        ALL_PATTERNS.iter().position(|p| *p == self).unwrap()
    }

    pub fn display_name(self) -> &'static str {
        match self {
            PatternId::Ownable => "Ownable",
            PatternId::Stoppable => "Stoppable",
            PatternId::PullPayment => "Pull Payment",
            PatternId::ReentrancyGuard => "Reentrancy Guard",
            PatternId::Payable => "Payable",
            PatternId::Borrower => "Borrower",
            PatternId::Implementer => "Implementer",
            PatternId::ModifierUsage => "Modifier Usage",
            PatternId::StorageSaver => "Storage Saver",
            PatternId::Reader => "Reader",
            PatternId::Operator => "Operator",
            PatternId::Provider => "Provider",
            PatternId::Supporter => "Supporter",
            PatternId::Delegator => "Delegator",
            PatternId::NamedReturn => "Named Return",
            PatternId::Returnless => "Returnless",
            PatternId::Emitter => "Emitter",
            PatternId::Muted => "Muted",
        }
    }

    pub fn from_display_name(name: &str) -> Option<Self> {
        ALL_PATTERNS.iter().copied().find(|p| p.display_name() == name)
    }

    pub fn category(self) -> Category {
        match self {
            PatternId::Ownable
            | PatternId::Stoppable
            | PatternId::PullPayment
            | PatternId::ReentrancyGuard => Category::Security,
            PatternId::Payable
            | PatternId::Borrower
            | PatternId::Implementer
            | PatternId::ModifierUsage => Category::Functional,
            PatternId::StorageSaver | PatternId::Reader | PatternId::Operator => {
                Category::Optimization
            }
            PatternId::Provider | PatternId::Supporter | PatternId::Delegator => {
                Category::Interaction
            }
            PatternId::NamedReturn
            | PatternId::Returnless
            | PatternId::Emitter
            | PatternId::Muted => Category::Feedback,
        }
    }

    /// Which entity kinds the pattern is defined over. Abstract contracts
    /// are pooled with contracts throughout.
    pub fn eligible(self, kind: EntityKind) -> bool {
        use EntityKind::*;
        match self {
            PatternId::Ownable
            | PatternId::Stoppable
            | PatternId::PullPayment
            | PatternId::ReentrancyGuard
            | PatternId::Payable
            | PatternId::Borrower
            | PatternId::Implementer
            | PatternId::StorageSaver => matches!(kind, Contract | AbstractContract),
            PatternId::ModifierUsage
            | PatternId::Delegator
            | PatternId::Emitter
            | PatternId::Muted => matches!(kind, Contract | AbstractContract | Library),
            PatternId::Reader
            | PatternId::Operator
            | PatternId::Provider
            | PatternId::Supporter
            | PatternId::NamedReturn
            | PatternId::Returnless => {
                matches!(kind, Contract | AbstractContract | Interface | Library)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_order_is_stable() {
        assert_eq!(PatternId::Ownable.index(), 0);
        assert_eq!(PatternId::StorageSaver.index(), 8);
        assert_eq!(PatternId::Muted.index(), 17);
        for (i, p) in ALL_PATTERNS.iter().enumerate() {
            assert_eq!(p.index(), i);
        }
    }

    #[test]
    fn display_names_round_trip() {
        for p in ALL_PATTERNS {
            assert_eq!(PatternId::from_display_name(p.display_name()), Some(p));
        }
        assert_eq!(PatternId::from_display_name("Pull Payment"), Some(PatternId::PullPayment));
        assert_eq!(PatternId::from_display_name("pull payment"), None);
    }

    #[test]
    fn eligibility_matches_the_catalog() {
        use EntityKind::*;
        // Contract-only patterns.
        for p in [PatternId::Ownable, PatternId::Payable, PatternId::StorageSaver] {
            assert!(p.eligible(Contract) && p.eligible(AbstractContract));
            assert!(!p.eligible(Interface) && !p.eligible(Library));
        }
        // Contract + library.
        for p in [PatternId::ModifierUsage, PatternId::Delegator, PatternId::Emitter, PatternId::Muted] {
            assert!(p.eligible(Library));
            assert!(!p.eligible(Interface));
        }
        // Contract + interface + library.
        for p in [PatternId::Reader, PatternId::Provider, PatternId::NamedReturn] {
            assert!(p.eligible(Interface) && p.eligible(Library) && p.eligible(Contract));
        }
    }

    #[test]
    fn categories_partition_the_catalog() {
        let security = ALL_PATTERNS.iter().filter(|p| p.category() == Category::Security).count();
        let functional = ALL_PATTERNS.iter().filter(|p| p.category() == Category::Functional).count();
        let optimization =
            ALL_PATTERNS.iter().filter(|p| p.category() == Category::Optimization).count();
        let interaction =
            ALL_PATTERNS.iter().filter(|p| p.category() == Category::Interaction).count();
        let feedback = ALL_PATTERNS.iter().filter(|p| p.category() == Category::Feedback).count();
        assert_eq!(
            (security, functional, optimization, interaction, feedback),
            (4, 4, 3, 3, 4)
        );
    }
}
