//! Bounded single-producer/single-consumer streams with an explicit
//! end-of-batch marker.
//!
//! A receiver that sees the channel disconnect before the marker reports the
//! stream as poisoned: the producing stage died mid-batch.

use std::fmt;
use std::sync::Arc;

use crossbeam_channel::{Receiver, Sender};

enum Packet<T> {
    Item(T),
    End,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StreamError {
    /// Producer went away without sending end-of-batch.
    Poisoned { stream: Arc<str> },
    /// Consumer went away; the item was not delivered.
    Closed { stream: Arc<str> },
}

impl fmt::Display for StreamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StreamError::Poisoned { stream } => {
                write!(f, "stream `{stream}` disconnected before end_of_batch")
            }
            StreamError::Closed { stream } => write!(f, "stream `{stream}` has no consumer"),
        }
    }
}

impl std::error::Error for StreamError {}

pub struct StreamSender<T> {
    tx: Sender<Packet<T>>,
    name: Arc<str>,
}

pub struct StreamReceiver<T> {
    rx: Receiver<Packet<T>>,
    name: Arc<str>,
}

/// Creates a stream holding at most `capacity` in-flight items.
pub fn bounded<T>(
    name: impl Into<Arc<str>>,
    capacity: usize,
) -> (StreamSender<T>, StreamReceiver<T>) {
    let name = name.into();
    let (tx, rx) = crossbeam_channel::bounded(capacity);
    (
        StreamSender {
            tx,
            name: name.clone(),
        },
        StreamReceiver { rx, name },
    )
}

impl<T> StreamSender<T> {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Blocks while the stream is full.
    pub fn send(&self, item: T) -> Result<(), StreamError> {
        self.tx
            .send(Packet::Item(item))
            .map_err(|_| StreamError::Closed {
                stream: self.name.clone(),
            })
    }

    /// Sends end-of-batch and closes the stream.
    pub fn finish(self) -> Result<(), StreamError> {
        self.tx.send(Packet::End).map_err(|_| StreamError::Closed {
            stream: self.name.clone(),
        })
    }
}

impl<T> StreamReceiver<T> {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// `Ok(None)` on end-of-batch. Blocks while the stream is empty.
    pub fn recv(&self) -> Result<Option<T>, StreamError> {
        match self.rx.recv() {
            Ok(Packet::Item(item)) => Ok(Some(item)),
            Ok(Packet::End) => Ok(None),
            Err(_) => Err(StreamError::Poisoned {
                stream: self.name.clone(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn end_marker_terminates() {
        let (tx, rx) = bounded::<u32>("a -> b", 4);
        tx.send(1).unwrap();
        tx.send(2).unwrap();
        tx.finish().unwrap();
        assert_eq!(rx.recv(), Ok(Some(1)));
        assert_eq!(rx.recv(), Ok(Some(2)));
        assert_eq!(rx.recv(), Ok(None));
    }

    #[test]
    fn dropped_producer_poisons() {
        let (tx, rx) = bounded::<u32>("a -> b", 4);
        tx.send(1).unwrap();
        drop(tx);
        assert_eq!(rx.recv(), Ok(Some(1)));
        let err = rx.recv().unwrap_err();
        assert!(matches!(err, StreamError::Poisoned { .. }));
        assert!(err.to_string().contains("a -> b"));
    }

    #[test]
    fn dropped_consumer_closes() {
        let (tx, rx) = bounded::<u32>("x", 1);
        drop(rx);
        assert!(matches!(tx.send(1), Err(StreamError::Closed { .. })));
    }
}
