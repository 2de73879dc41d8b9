/** Wire types mirroring the service's plan interchange schema (planglow/1). */

export type BackgroundLevel =
  | 'novice'
  | 'advanced_beginner'
  | 'competence'
  | 'proficiency'
  | 'expertise'
  | 'mastery';

export const BACKGROUND_LEVELS: BackgroundLevel[] = [
  'novice',
  'advanced_beginner',
  'competence',
  'proficiency',
  'expertise',
  'mastery',
];

export type ResourceStatus = 'valid' | 'invalid' | 'replaced';

export interface ObjectiveDoc {
  text: string;
  bloom_level: string;
}

export interface ResourceDoc {
  kind: string;
  external_id: string;
  url: string;
  title: string;
  duration_seconds: number;
  views: number;
  likes: number;
  description: string;
  status: ResourceStatus;
  provenance?: string;
}

export interface DayDoc {
  index: number;
  topic: string;
  topic_rationale: string;
  objectives: ObjectiveDoc[];
  resources: ResourceDoc[];
  estimated_minutes: number;
}

export interface WeekDoc {
  index: number;
  title: string;
  objectives: ObjectiveDoc[];
  content_rationale: string;
  connections: string;
  days: DayDoc[];
}

export interface ProfileDoc {
  subject: string;
  goal: string;
  background_level: BackgroundLevel;
  duration_weeks: number;
  daily_minutes: number;
  preferred_media?: string[];
}

export interface PlanDocument {
  schema: string;
  plan_id: string;
  version: number;
  profile: ProfileDoc;
  days_per_week: number;
  created_at: string;
  updated_at: string;
  weeks: WeekDoc[];
}

export interface CreatePlanForm {
  subject: string;
  goal: string;
  background_level: BackgroundLevel;
  duration_weeks: number;
  daily_minutes: number;
}

export interface Candidate {
  rank: number;
  relevance: number;
  external_id: string;
  title: string;
  url: string;
  duration_seconds: number;
  views: number;
  likes: number;
  description: string;
}

export interface ChatResponse {
  reply: string;
  intent: 'edit' | 'question';
  version: number;
  plan?: PlanDocument;
}

export interface SessionSummary {
  counts: Record<string, number>;
  plans_created: number;
  edits_applied: number;
}

export type EventType =
  | 'viewed_level_descriptions'
  | 'submitted_form'
  | 'inline_edit'
  | 'chat_message'
  | 'viewed_week_explanation'
  | 'viewed_day_explanation'
  | 'opened_alternatives'
  | 'selected_alternative';
