use super::{Column, ColumnType, Record, Value};
use crate::store::{ActionRow, MovementRow};

const fn col(name: &'static str, ty: ColumnType) -> Column {
    Column { name, ty }
}

pub const ACTION_COLUMNS: [&str; 7] = [
    "player_name",
    "question_answer",
    "question_number",
    "question_description",
    "timestamp",
    "session_id",
    "time_to_answer_ms",
];

pub const MOVEMENT_COLUMNS: [&str; 13] = [
    "player_name",
    "x_axis",
    "y_axis",
    "z_axis",
    "euler_x",
    "euler_y",
    "euler_z",
    "quat_x",
    "quat_y",
    "quat_z",
    "quat_w",
    "timestamp",
    "session_id",
];

static ACTION_SCHEMA: [Column; 7] = [
    col("player_name", ColumnType::Text),
    col("question_answer", ColumnType::Text),
    col("question_number", ColumnType::Text),
    col("question_description", ColumnType::Text),
    col("timestamp", ColumnType::Time),
    col("session_id", ColumnType::Text),
    col("time_to_answer_ms", ColumnType::Int),
];

static MOVEMENT_SCHEMA: [Column; 13] = [
    col("player_name", ColumnType::Text),
    col("x_axis", ColumnType::Float),
    col("y_axis", ColumnType::Float),
    col("z_axis", ColumnType::Float),
    col("euler_x", ColumnType::Float),
    col("euler_y", ColumnType::Float),
    col("euler_z", ColumnType::Float),
    col("quat_x", ColumnType::Float),
    col("quat_y", ColumnType::Float),
    col("quat_z", ColumnType::Float),
    col("quat_w", ColumnType::Float),
    col("timestamp", ColumnType::Time),
    col("session_id", ColumnType::Text),
];

struct Cursor(std::vec::IntoIter<Value>);

impl Cursor {
    fn text(&mut self) -> String {
        match self.0.next() {
            Some(Value::Text(s)) => s,
            _ => String::new(),
        }
    }

    fn int(&mut self) -> i64 {
        match self.0.next() {
            Some(Value::Int(i)) => i,
            _ => 0,
        }
    }

    fn float(&mut self) -> f64 {
        match self.0.next() {
            Some(Value::Float(f)) => f,
            _ => 0.0,
        }
    }

    fn time(&mut self) -> i64 {
        match self.0.next() {
            Some(Value::Time(t)) => t,
            _ => 0,
        }
    }
}

impl Record for ActionRow {
    const KIND: &'static str = "actions";
    const COLUMNS: &'static [Column] = &ACTION_SCHEMA;
    const PAPER_LEN: usize = 5;

    fn values(&self) -> Vec<Value> {
        vec![
            Value::Text(self.player_name.clone()),
            Value::Text(self.question_answer.clone()),
            Value::Text(self.question_number.clone()),
            Value::Text(self.question_description.clone()),
            Value::Time(self.timestamp),
            Value::Text(self.session_id.clone()),
            Value::Int(self.time_to_answer_ms),
        ]
    }

    fn from_values(values: Vec<Value>) -> Self {
        let mut c = Cursor(values.into_iter());
        Self {
            player_name: c.text(),
            question_answer: c.text(),
            question_number: c.text(),
            question_description: c.text(),
            timestamp: c.time(),
            session_id: c.text(),
            time_to_answer_ms: c.int(),
        }
    }
}

impl Record for MovementRow {
    const KIND: &'static str = "movements";
    const COLUMNS: &'static [Column] = &MOVEMENT_SCHEMA;
    const PAPER_LEN: usize = 12;

    fn values(&self) -> Vec<Value> {
        vec![
            Value::Text(self.player_name.clone()),
            Value::Float(self.x_axis),
            Value::Float(self.y_axis),
            Value::Float(self.z_axis),
            Value::Float(self.euler_x),
            Value::Float(self.euler_y),
            Value::Float(self.euler_z),
            Value::Float(self.quat_x),
            Value::Float(self.quat_y),
            Value::Float(self.quat_z),
            Value::Float(self.quat_w),
            Value::Time(self.timestamp),
            Value::Text(self.session_id.clone()),
        ]
    }

    fn from_values(values: Vec<Value>) -> Self {
        let mut c = Cursor(values.into_iter());
        Self {
            player_name: c.text(),
            x_axis: c.float(),
            y_axis: c.float(),
            z_axis: c.float(),
            euler_x: c.float(),
            euler_y: c.float(),
            euler_z: c.float(),
            quat_x: c.float(),
            quat_y: c.float(),
            quat_z: c.float(),
            quat_w: c.float(),
            timestamp: c.time(),
            session_id: c.text(),
        }
    }
}
