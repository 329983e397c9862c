//! Fixtures compiled into the crate: the three reference devices, their
//! zone, and the ownership snapshot. The same files ship under `data/` for
//! use from a lab config.

use crate::dnsctl::Zone;
use crate::model::DeviceModel;

pub const ZONE_JSON: &str = include_str!("../data/zone.json");
pub const TPLINK_BULB_JSON: &str = include_str!("../data/devices/tplink-bulb.json");
pub const YI_CAM_JSON: &str = include_str!("../data/devices/yi-cam.json");
pub const BOSIWO_CAM_JSON: &str = include_str!("../data/devices/bosiwo-cam.json");
pub const OWNERSHIP_JSON: &str = include_str!("../data/ownership.json");

pub fn zone() -> Zone {
    Zone::from_json(ZONE_JSON).expect("bundled zone is valid")
}

pub fn tplink_bulb() -> DeviceModel {
    DeviceModel::from_json(TPLINK_BULB_JSON).expect("bundled bulb model is valid")
}

pub fn yi_cam() -> DeviceModel {
    DeviceModel::from_json(YI_CAM_JSON).expect("bundled yi model is valid")
}

pub fn bosiwo_cam() -> DeviceModel {
    DeviceModel::from_json(BOSIWO_CAM_JSON).expect("bundled bosiwo model is valid")
}

pub fn all_devices() -> Vec<DeviceModel> {
    vec![tplink_bulb(), yi_cam(), bosiwo_cam()]
}
