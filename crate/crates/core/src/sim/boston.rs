//! Hand-ordered command log for the reference board picture: Boston with
//! nine red alerts and one yellow, a VPN users to Sydney connectivity pipe,
//! and a health alert on a Sydney VoIP phone.
//!
//! Replay it against `generate_fixture(BIG_ENTERPRISE_ASSETS)`.

use crate::alert::{AlertCategory, AlertSubject};
use crate::command::{ClientIdentity, Command, CommandBody};

/// 2013-07-01T13:00:00Z
pub const BOSTON_START_MS: u64 = 1_372_683_600_000;

const BOSTON_ALERTS: [(&str, AlertCategory, &str); 10] = [
    ("bos-ws-01", AlertCategory::Security, "malware signature match"),
    ("bos-vc-01", AlertCategory::Performance, "jitter above threshold"),
    ("bos-prn-01", AlertCategory::Health, "printer offline"),
    ("bos-fs-01", AlertCategory::Health, "disk failure predicted"),
    ("bos-ws-02", AlertCategory::Security, "beaconing to known C2"),
    ("bos-vc-02", AlertCategory::Health, "phone unregistered"),
    ("bos-prn-02", AlertCategory::Security, "default credentials in use"),
    ("bos-fs-02", AlertCategory::Performance, "share latency high"),
    ("bos-ws-03", AlertCategory::Performance, "cpu saturation"),
    ("bos-vc-03", AlertCategory::Security, "sip brute force"),
];

/// The alert that gets tasked, leaving Boston at nine red and one yellow.
pub const BOSTON_TASKED_ALERT: &str = "boston-02";
pub const SYDNEY_ALERT: &str = "sydney-01";

pub fn make_boston_fixture() -> Vec<Command> {
    let telemetry = ClientIdentity::member("telemetry");
    let mut at = BOSTON_START_MS;
    let mut log = Vec::new();
    let mut push = |issuer: &ClientIdentity, body: CommandBody, at: u64| {
        let id = format!("boston-fixture-{:02}", log.len() + 1);
        log.push(Command::new(id, issuer.clone(), at, body));
    };

    for (i, (asset, category, summary)) in BOSTON_ALERTS.iter().enumerate() {
        push(
            &telemetry,
            CommandBody::RaiseAlert {
                alert_id: format!("boston-{:02}", i + 1).into(),
                category: *category,
                subject: AlertSubject::Asset((*asset).into()),
                summary: (*summary).into(),
            },
            at,
        );
        at += 15_000;
    }
    push(
        &ClientIdentity::member("amy"),
        CommandBody::TaskAlert {
            alert_id: BOSTON_TASKED_ALERT.into(),
            ticket_id: "T-1001".into(),
            assignee: "amy".into(),
        },
        at,
    );
    at += 30_000;
    push(
        &telemetry,
        CommandBody::ReportFlow {
            endpoint_a: "vpn_users".into(),
            endpoint_b: "sydney_office".into(),
            available_fraction: 0.4,
            current_fraction: 0.25,
        },
        at,
    );
    at += 30_000;
    push(
        &telemetry,
        CommandBody::RaiseAlert {
            alert_id: SYDNEY_ALERT.into(),
            category: AlertCategory::Health,
            subject: AlertSubject::Asset("syd-vc-01".into()),
            summary: "host down".into(),
        },
        at,
    );
    log
}
