use super::MessageCategory::{self, *};

/// One entry of the committed subject-code table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Subject {
    pub category: MessageCategory,
    pub code: u8,
    pub name: &'static str,
}

const fn s(category: MessageCategory, code: u8, name: &'static str) -> Subject {
    Subject { category, code, name }
}

/// Subject codes per category. Codes are stable; new subjects append.
pub const SUBJECTS: &[Subject] = &[
    s(ProtectiveSign, 1, "hospital"),
    s(ProtectiveSign, 2, "safety zone"),
    s(ProtectiveSign, 3, "white flag"),
    s(ProtectiveSign, 4, "humanitarian convoy"),
    s(ProtectiveSign, 5, "cultural property"),
    s(ProtectiveSign, 6, "medical unit"),
    s(EmergencySignal, 1, "emergency beacon"),
    s(EmergencySignal, 2, "distress signal"),
    s(EmergencySignal, 3, "surrender beacon"),
    s(DangerSign, 1, "area under attack"),
    s(DangerSign, 2, "land mines"),
    s(DangerSign, 3, "disaster"),
    s(DangerSign, 4, "non-state belligerents"),
    s(DangerSign, 5, "military activity"),
    s(DangerSign, 6, "military installation"),
    s(StatusSignal, 1, "proof of life"),
    s(StatusSignal, 2, "persons requiring assistance"),
    s(StatusSignal, 3, "critical infrastructure status"),
    s(InfrastructureSign, 1, "road"),
    s(InfrastructureSign, 2, "school"),
    s(InfrastructureSign, 3, "utility"),
    s(InfrastructureSign, 4, "water treatment"),
    s(InfrastructureSign, 5, "hospital"),
    s(InfrastructureSign, 6, "power plant"),
    s(MissionSignal, 1, "convoy movement"),
    s(MissionSignal, 2, "deconfliction notice"),
    s(RequestSignal, 1, "area access"),
    s(RequestSignal, 2, "cease fire"),
    s(ResourceMessage, 1, "official website"),
    s(ResourceMessage, 2, "minefield record"),
    s(ResourceMessage, 3, "news feed"),
    s(ResourceMessage, 4, "authenticated photograph"),
    s(FreeText, 1, "commentary"),
    s(FreeText, 2, "conflict evidence"),
];

pub fn subject(category: MessageCategory, code: u8) -> Option<&'static Subject> {
    SUBJECTS.iter().find(|s| s.category == category && s.code == code)
}

pub fn subjects_for(category: MessageCategory) -> Vec<&'static Subject> {
    SUBJECTS.iter().filter(|s| s.category == category).collect()
}
