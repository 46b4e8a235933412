# Result documents and the resumable step cache