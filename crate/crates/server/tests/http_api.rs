use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use bigboard_core::command::{ClientIdentity, Command, CommandBody, Role};
use bigboard_core::journal::RejectClass;
use bigboard_core::replica::Replica;
use bigboard_core::sequencer::{Delta, Outcome, Snapshot};
use bigboard_core::sim::make_boston_fixture;
use bigboard_core::topology::load_topology;
use bigboard_server::protocol::{ErrorBody, ErrorClass, Health, ViewReply};
use bigboard_server::{start, RunningServer, ServerConfig};
use futures::StreamExt;
use reqwest::StatusCode;

const BOSS: &str = "boss-token";
const CREW: &str = "crew-token";

fn config(journal: Option<PathBuf>, retention: usize) -> ServerConfig {
    ServerConfig {
        listen: ([127, 0, 0, 1], 0).into(),
        stream_listen: Some(([127, 0, 0, 1], 0).into()),
        journal,
        manager_token: BOSS.into(),
        member_token: CREW.into(),
        manager_client_id: "noc-manager".into(),
        retention,
        ..Default::default()
    }
}

struct Api {
    base: String,
    http: reqwest::Client,
}

impl Api {
    fn new(server: &RunningServer) -> Self {
        Self {
            base: format!("http://{}", server.http_addr),
            http: reqwest::Client::new(),
        }
    }

    async fn post(&self, token: &str, cmd: &Command) -> (StatusCode, serde_json::Value) {
        let r = self
            .http
            .post(format!("{}/command", self.base))
            .bearer_auth(token)
            .json(cmd)
            .send()
            .await
            .unwrap();
        (r.status(), r.json().await.unwrap())
    }

    async fn get<T: serde::de::DeserializeOwned>(&self, path: &str) -> T {
        let r = self.http.get(format!("{}{path}", self.base)).bearer_auth(BOSS).send().await.unwrap();
        assert!(r.status().is_success(), "{path}: {}", r.status());
        r.json().await.unwrap()
    }

    async fn replica(&self) -> Replica {
        let doc = self.http.get(format!("{}/topology", self.base)).bearer_auth(CREW).send().await.unwrap();
        let topo = Arc::new(load_topology(&doc.text().await.unwrap()).unwrap());
        let snap: Snapshot = self.get("/snapshot").await;
        Replica::checkout(topo, &snap).unwrap()
    }

    /// Reads `n` delta lines from a fresh subscription.
    async fn deltas(&self, from: u64, n: usize) -> Vec<String> {
        let r = self
            .http
            .get(format!("{}/deltas?from={from}", self.base))
            .bearer_auth(CREW)
            .send()
            .await
            .unwrap();
        assert_eq!(r.status(), StatusCode::OK);
        let mut body = r.bytes_stream();
        let mut buf = Vec::new();
        let mut lines = Vec::new();
        while lines.len() < n {
            let chunk = tokio::time::timeout(Duration::from_secs(10), body.next()).await.unwrap().unwrap().unwrap();
            buf.extend_from_slice(&chunk);
            while let Some(i) = buf.iter().position(|&b| b == b'\n') {
                let line: Vec<u8> = buf.drain(..=i).collect();
                lines.push(String::from_utf8(line[..line.len() - 1].to_vec()).unwrap());
            }
        }
        lines
    }
}

fn member_cmd(id: &str, body: CommandBody) -> Command {
    Command::new(id, ClientIdentity::member("amy"), 1_372_683_600_000, body)
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn boston_over_http_with_replicas_and_subscribers() {
    let server = start(&config(None, 10_000)).await.unwrap();
    let api = Api::new(&server);
    let health: Health = reqwest::get(format!("{}/health", api.base)).await.unwrap().json().await.unwrap();
    assert_eq!((health.seq, health.tick_ms, health.window_size), (0, 2000, 12));

    let mut early = api.replica().await;
    assert_eq!(early.seq(), 0);
    for cmd in make_boston_fixture() {
        let (status, _) = api.post(CREW, &cmd).await;
        assert_eq!(status, StatusCode::OK, "{}", cmd.command_id);
    }

    let a = api.deltas(0, 13).await;
    let b = api.deltas(0, 13).await;
    assert_eq!(a, b, "subscribers from one seq see identical bytes");
    for line in &a {
        let d: Delta = serde_json::from_str(line).unwrap();
        assert!(early.apply(&d).unwrap());
    }
    let late = api.replica().await;
    assert_eq!(late.seq(), 13);
    assert_eq!(early.digest(), late.digest());

    let boston = late.view().aggregate_badges.into_iter().find(|b| b.sub_zone_id.as_str() == "boston").unwrap();
    assert_eq!((boston.red_count, boston.yellow_count), (9, 1));

    // live tail: a subscriber at the head sees the next command
    let tail = {
        let api = Api { base: api.base.clone(), http: api.http.clone() };
        tokio::spawn(async move { api.deltas(13, 1).await })
    };
    tokio::time::sleep(Duration::from_millis(200)).await;
    let mgr = Command::new("m1", ClientIdentity::member("whoever"), 1, CommandBody::ActivateMission { mission_id: "vtc_voip".into() });
    let (status, body) = api.post(BOSS, &mgr).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let tail: Delta = serde_json::from_str(&tail.await.unwrap()[0]).unwrap();
    assert_eq!(tail.seq, 14);
    // manager tokens always act as the configured manager
    assert_eq!(tail.command.issuer, ClientIdentity::manager("noc-manager"));
    assert!(early.apply(&tail).unwrap());

    let v: ViewReply = api.get("/view?tick=0").await;
    assert_eq!(v.seq, 14);
    assert!(v.view.individual_badges.contains(&bigboard_core::ids::AlertId::from("sydney-01")));
    assert_eq!(v.view, early.view());
    assert!(v.menu_window.len() <= 12);
    server.shutdown();
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn status_codes() {
    let server = start(&config(None, 10_000)).await.unwrap();
    let api = Api::new(&server);
    let raise = member_cmd("r1", CommandBody::RaiseAlert {
        alert_id: "a1".into(),
        category: bigboard_core::alert::AlertCategory::Health,
        subject: bigboard_core::alert::AlertSubject::Asset("bos-ws-01".into()),
        summary: "x".into(),
    });
    let (s, first) = api.post(CREW, &raise).await;
    assert_eq!(s, StatusCode::OK);
    // idempotent replay
    let (s, again) = api.post(CREW, &raise).await;
    assert_eq!((s, &again), (StatusCode::OK, &first));
    let health: Health = api.get("/health").await;
    assert_eq!(health.seq, 1);

    // member toggling a mission
    let toggle = member_cmd("t1", CommandBody::ActivateMission { mission_id: "vtc_voip".into() });
    let (s, body) = api.post(CREW, &toggle).await;
    assert_eq!(s, StatusCode::FORBIDDEN);
    let out: Outcome = serde_json::from_value(body).unwrap();
    assert!(matches!(out, Outcome::Rejected { ref reason } if reason.class == RejectClass::Authorization));

    // members may not claim the manager identity, even with role member
    let mut spoof = toggle.clone();
    spoof.command_id = "t2".into();
    spoof.issuer = ClientIdentity { client_id: "noc-manager".into(), role: Role::Manager };
    let (s, body) = api.post(CREW, &spoof).await;
    assert_eq!(s, StatusCode::FORBIDDEN);
    assert_eq!(serde_json::from_value::<ErrorBody>(body).unwrap().error.class, ErrorClass::Forbidden);

    // engine precondition failure
    let ghost = member_cmd("g1", CommandBody::ResolveAlert { alert_id: "nope".into() });
    assert_eq!(api.post(CREW, &ghost).await.0, StatusCode::UNPROCESSABLE_ENTITY);

    let r = api.http.post(format!("{}/command", api.base)).bearer_auth("wrong").json(&raise).send().await.unwrap();
    assert_eq!(r.status(), StatusCode::UNAUTHORIZED);
    let r = api.http.get(format!("{}/snapshot", api.base)).send().await.unwrap();
    assert_eq!(r.status(), StatusCode::UNAUTHORIZED);
    let r = api.http.post(format!("{}/command", api.base)).bearer_auth(CREW).body("{not json").send().await.unwrap();
    assert_eq!(r.status(), StatusCode::BAD_REQUEST);
    let r = api.http.get(format!("{}/deltas?from=99", api.base)).bearer_auth(CREW).send().await.unwrap();
    assert_eq!(r.status(), StatusCode::CONFLICT);
    assert_eq!(server.board.seq(), 1);
    server.shutdown();
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn expired_subscription_asks_for_checkout() {
    let server = start(&config(None, 3)).await.unwrap();
    let api = Api::new(&server);
    for cmd in make_boston_fixture() {
        api.post(CREW, &cmd).await;
    }
    let r = api.http.get(format!("{}/deltas?from=2", api.base)).bearer_auth(CREW).send().await.unwrap();
    assert_eq!(r.status(), StatusCode::GONE);
    let body: ErrorBody = r.json().await.unwrap();
    assert!(body.error.message.contains("re-checkout"), "{}", body.error.message);
    assert_eq!(api.deltas(10, 3).await.len(), 3);
    server.shutdown();
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn restart_recovers_from_the_journal() {
    let dir = tempfile::tempdir().unwrap();
    let journal = dir.path().join("board.journal");
    let server = start(&config(Some(journal.clone()), 10_000)).await.unwrap();
    let api = Api::new(&server);
    for cmd in make_boston_fixture() {
        api.post(CREW, &cmd).await;
    }
    let rejected = member_cmd("x", CommandBody::ActivateMission { mission_id: "b_docs".into() });
    api.post(CREW, &rejected).await;
    let before: Health = api.get("/health").await;
    server.shutdown();

    let server = start(&config(Some(journal.clone()), 10_000)).await.unwrap();
    let api = Api::new(&server);
    let after: Health = api.get("/health").await;
    assert_eq!((after.seq, &after.digest), (before.seq, &before.digest));
    // the journal carries the rejection too, and idempotency survives restart
    assert_eq!(std::fs::read_to_string(&journal).unwrap().lines().count(), 14);
    assert_eq!(api.post(CREW, &rejected).await.0, StatusCode::FORBIDDEN);
    assert_eq!(std::fs::read_to_string(&journal).unwrap().lines().count(), 14);
    server.shutdown();
}
