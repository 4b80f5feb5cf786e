use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Empty,
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<Option<usize>> for Cell {
    fn from(x: Option<usize>) -> Self {
        x.map_or(Cell::Empty, Cell::from)
    }
}

pub type Row = Vec<Cell>;

fn render(c: &Cell) -> String {
    match c {
        Cell::Int(i) => i.to_string(),
        // shortest round-trip form
        Cell::Float(x) => format!("{:e}", x),
        Cell::Empty => String::new(),
    }
}

/// `trace.csv` writer: header row, `,` separator, `\n` line endings.
#[derive(Debug)]
pub struct TraceWriter {
    w: csv::Writer<BufWriter<File>>,
    width: usize,
    rows: u64,
}

impl TraceWriter {
    pub fn create(path: &Path, header: &[String]) -> csv::Result<Self> {
        let file = File::create(path)?;
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(BufWriter::new(file));
        w.write_record(header)?;
        Ok(Self {
            w,
            width: header.len(),
            rows: 0,
        })
    }

    pub fn write(&mut self, row: &[Cell]) -> csv::Result<()> {
        debug_assert_eq!(row.len(), self.width);
        self.w.write_record(row.iter().map(render))?;
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> u64 {
        self.rows
    }

    pub fn finish(mut self) -> csv::Result<u64> {
        self.w.flush()?;
        Ok(self.rows)
    }
}
