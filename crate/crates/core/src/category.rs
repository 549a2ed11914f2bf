//! The closed set of high-level data-practice categories.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One of the twelve high-level data-practice categories a policy segment
/// can be assigned to. Serialized by its display name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DataPracticeCategory {
    #[serde(rename = "First-Party Collection/Use")]
    FirstPartyCollection,
    #[serde(rename = "Third-Party Sharing/Collection")]
    ThirdPartySharing,
    #[serde(rename = "User Access, Edit and Deletion")]
    UserAccessEditDeletion,
    #[serde(rename = "Data Retention")]
    DataRetention,
    #[serde(rename = "Data Security")]
    DataSecurity,
    #[serde(rename = "International & Specific Audiences")]
    InternationalSpecificAudiences,
    #[serde(rename = "Do Not Track")]
    DoNotTrack,
    #[serde(rename = "Policy Change")]
    PolicyChange,
    #[serde(rename = "User Choice/Control")]
    UserChoiceControl,
    #[serde(rename = "Introductory/Generic")]
    IntroductoryGeneric,
    #[serde(rename = "Practice not covered")]
    PracticeNotCovered,
    #[serde(rename = "Privacy contact information")]
    PrivacyContactInformation,
}

impl DataPracticeCategory {
    pub const COUNT: usize = 12;

    pub const ALL: [DataPracticeCategory; Self::COUNT] = [
        Self::FirstPartyCollection,
        Self::ThirdPartySharing,
        Self::UserAccessEditDeletion,
        Self::DataRetention,
        Self::DataSecurity,
        Self::InternationalSpecificAudiences,
        Self::DoNotTrack,
        Self::PolicyChange,
        Self::UserChoiceControl,
        Self::IntroductoryGeneric,
        Self::PracticeNotCovered,
        Self::PrivacyContactInformation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::FirstPartyCollection => "First-Party Collection/Use",
            Self::ThirdPartySharing => "Third-Party Sharing/Collection",
            Self::UserAccessEditDeletion => "User Access, Edit and Deletion",
            Self::DataRetention => "Data Retention",
            Self::DataSecurity => "Data Security",
            Self::InternationalSpecificAudiences => "International & Specific Audiences",
            Self::DoNotTrack => "Do Not Track",
            Self::PolicyChange => "Policy Change",
            Self::UserChoiceControl => "User Choice/Control",
            Self::IntroductoryGeneric => "Introductory/Generic",
            Self::PracticeNotCovered => "Practice not covered",
            Self::PrivacyContactInformation => "Privacy contact information",
        }
    }

    /// Position in [`Self::ALL`]; stable across releases.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for DataPracticeCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown data-practice category {0:?}")]
pub struct UnknownCategory(pub String);

impl FromStr for DataPracticeCategory {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| UnknownCategory(s.to_string()))
    }
}
