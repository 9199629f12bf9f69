// DTOs mirrored from the collection service JSON payloads.

export type FavouriteKind = 'item' | 'feature';

export interface FeatureHit {
  feature_id: string;
  label: string;
  doc_freq: number;
}

export interface ItemHit {
  item_id: string;
  title: string;
}

export interface SessionStatus {
  session_id: string;
  state: 'collecting' | 'testing' | 'submitted';
  source: 'volunteer' | 'crowdsourced';
  favourites: { kind: FavouriteKind; target_id: string }[];
  counts: Record<string, number>;
  minimums: Record<string, number>;
  minimums_met: boolean;
}

export interface SheetEntry {
  kind: FavouriteKind;
  target_id: string;
  label: string;
}

export interface SheetResponse {
  session_id: string;
  state: string;
  sheet: SheetEntry[];
}

export interface Verdict {
  session_id: string;
  state: string;
  user_id: string;
  precision: number | null;
  reliable: boolean;
}

export interface Demographics {
  source: 'volunteer' | 'crowdsourced';
  age_range: string;
  gender: 'male' | 'female' | 'unspecified';
  country: string;
}

/** One element the participant picked, plus what the badge counters need. */
export interface Selection {
  kind: FavouriteKind;
  targetId: string;
  label: string;
  /** 'item' for movies, otherwise the attribute type (genre, actor, ...). */
  category: string;
}
