mod common;

use std::time::Duration;

use vrfb_ems::error::Error;
use vrfb_ems::fixtures;
use vrfb_ems::forecast::{
    fetch_daily_forecast, synthesize_payload, FixtureForecast, ForecastProvider, HttpForecastClient,
};

fn payload() -> Vec<u8> {
    synthesize_payload(&fixtures::week_forecast()).unwrap().into_bytes()
}

#[test]
fn live_and_fixture_paths_agree() {
    let bytes = payload();
    let fixture = FixtureForecast::from_bytes(&bytes, fixtures::REGION_ID).unwrap();
    let dates: Vec<_> = fixture.days().map(|d| d.date).collect();
    let (base, server) = common::serve(bytes, dates.len());
    for date in &dates {
        let live = fetch_daily_forecast(fixtures::REGION_ID, &base, *date).unwrap();
        assert_eq!(live, fixture.forecast(*date).unwrap());
    }
    let requests = server.join().unwrap();
    assert!(
        requests.iter().all(|r| r == "GET /1070500.json HTTP/1.1"),
        "{requests:?}"
    );
}

#[test]
fn custom_path_template() {
    let (base, server) = common::serve(payload(), 1);
    let mut client = HttpForecastClient::new(format!("{base}/"), fixtures::REGION_ID);
    client.path_template = "{base}/api/forecast/daily/{region}.json".into();
    let day = client.forecast(fixtures::week_start().date_naive()).unwrap();
    assert_eq!(day.weather_type_id, 1);
    assert_eq!(
        server.join().unwrap(),
        ["GET /api/forecast/daily/1070500.json HTTP/1.1"]
    );
}

#[test]
fn unreachable_endpoint_reports_every_attempt() {
    let mut client = HttpForecastClient::new("http://127.0.0.1:1", fixtures::REGION_ID);
    client.retries = 1;
    client.timeout = Duration::from_secs(2);
    match client.forecast(fixtures::week_start().date_naive()) {
        Err(Error::Http { url, attempts, .. }) => {
            assert_eq!(attempts, 2);
            assert_eq!(url, "http://127.0.0.1:1/1070500.json");
        }
        other => panic!("expected an HTTP error, got {other:?}"),
    }
}

#[test]
fn missing_date_is_an_error_not_a_guess() {
    let (base, server) = common::serve(payload(), 1);
    let date = "2019-06-01".parse().unwrap();
    let err = fetch_daily_forecast(fixtures::REGION_ID, &base, date).unwrap_err();
    assert!(matches!(err, Error::ForecastDateMissing { .. }), "{err:?}");
    server.join().unwrap();
}
